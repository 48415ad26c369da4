#include <maxshape/errors.hpp>
#include <maxshape/mesh.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>

namespace maxshape {

namespace {
    std::uint64_t edge_key(int a, int b)
    {
        return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) | static_cast<std::uint32_t>(b);
    }

    double cross(const Point& a, const Point& b) { return a.x() * b.y() - a.y() * b.x(); }

    bool segments_intersect(const Point& p1, const Point& p2, const Point& q1, const Point& q2)
    {
        const double d1 = cross(q2 - q1, p1 - q1);
        const double d2 = cross(q2 - q1, p2 - q1);
        const double d3 = cross(p2 - p1, q1 - p1);
        const double d4 = cross(p2 - p1, q2 - p1);
        if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
            return true;
        auto on_segment = [](const Point& a, const Point& b, const Point& p) {
            return std::min(a.x(), b.x()) <= p.x() && p.x() <= std::max(a.x(), b.x())
                && std::min(a.y(), b.y()) <= p.y() && p.y() <= std::max(a.y(), b.y());
        };
        if (d1 == 0 && on_segment(q1, q2, p1)) return true;
        if (d2 == 0 && on_segment(q1, q2, p2)) return true;
        if (d3 == 0 && on_segment(p1, p2, q1)) return true;
        if (d4 == 0 && on_segment(p1, p2, q2)) return true;
        return false;
    }

    double triangle_min_angle(const Point& a, const Point& b, const Point& c)
    {
        auto angle = [](const Point& p, const Point& q, const Point& r) {
            const Point u = q - p;
            const Point v = r - p;
            return std::atan2(std::abs(cross(u, v)), u.dot(v));
        };
        return std::min({angle(a, b, c), angle(b, c, a), angle(c, a, b)});
    }

    double triangle_aspect(const Point& a, const Point& b, const Point& c)
    {
        const double la = (b - c).norm();
        const double lb = (c - a).norm();
        const double lc = (a - b).norm();
        const double area = std::abs(signed_area(a, b, c));
        if (area <= 0.0) return std::numeric_limits<double>::infinity();
        const double diameter = std::max({la, lb, lc});
        const double inscribed = 4.0 * area / (la + lb + lc);
        return diameter / inscribed;
    }
} // namespace

double signed_area(const Point& a, const Point& b, const Point& c) { return 0.5 * cross(b - a, c - a); }

bool polygon_is_simple(const std::vector<Point>& pts, const std::vector<int>& loop)
{
    const int n = static_cast<int>(loop.size());
    if (n < 3) return false;

    // bounding boxes make the quadratic scan cheap enough for a few hundred edges
    std::vector<Eigen::Vector4d> boxes(n);
    for (int i = 0; i < n; ++i) {
        const Point& p = pts[loop[i]];
        const Point& q = pts[loop[(i + 1) % n]];
        boxes[i] << std::min(p.x(), q.x()), std::min(p.y(), q.y()), std::max(p.x(), q.x()), std::max(p.y(), q.y());
    }
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (j == i + 1 || (i == 0 && j == n - 1)) continue;
            if (boxes[i][2] < boxes[j][0] || boxes[j][2] < boxes[i][0] || boxes[i][3] < boxes[j][1]
                || boxes[j][3] < boxes[i][1])
                continue;
            if (segments_intersect(pts[loop[i]], pts[loop[(i + 1) % n]], pts[loop[j]], pts[loop[(j + 1) % n]]))
                return false;
        }
    }
    return true;
}

Mesh::Mesh(std::vector<Point> nodes, std::vector<Triangle> triangles, std::vector<int> boundary,
           std::vector<NodeMarker> markers)
    : nodes_(std::move(nodes)), triangles_(std::move(triangles)), boundary_(std::move(boundary)),
      markers_(std::move(markers))
{
    validate();
}

Mesh::Mesh(std::vector<Point> nodes, std::vector<Triangle> triangles, std::vector<int> boundary)
    : nodes_(std::move(nodes)), triangles_(std::move(triangles)), boundary_(std::move(boundary))
{
    markers_.assign(nodes_.size(), NodeMarker::interior);
    for (int b : boundary_) {
        if (b >= 0 && b < static_cast<int>(markers_.size())) markers_[b] = NodeMarker::dirichlet;
    }
    validate();
}

void Mesh::validate()
{
    const int n = num_nodes();
    if (n < 3 || triangles_.empty()) throw GeometryError("mesh needs at least one triangle");
    if (static_cast<int>(markers_.size()) != n) throw GeometryError("marker count differs from node count");

    areas_.resize(triangles_.size());
    h_max_ = 0.0;
    for (int k = 0; k < num_triangles(); ++k) {
        const auto& t = triangles_[k];
        for (int v : t) {
            if (v < 0 || v >= n) throw GeometryError("triangle " + std::to_string(k) + " has an invalid node index");
        }
        const Point &a = nodes_[t[0]], &b = nodes_[t[1]], &c = nodes_[t[2]];
        areas_[k] = signed_area(a, b, c);
        if (!(areas_[k] > 0.0)) throw GeometryError("triangle " + std::to_string(k) + " has non-positive area");
        h_max_ = std::max({h_max_, (a - b).norm(), (b - c).norm(), (c - a).norm()});
    }

    // Directed edges that appear without their twin form the topological boundary.
    std::unordered_map<std::uint64_t, int> directed;
    directed.reserve(triangles_.size() * 3);
    for (const auto& t : triangles_) {
        for (int i = 0; i < 3; ++i) {
            const auto key = edge_key(t[i], t[(i + 1) % 3]);
            if (directed.count(key)) throw GeometryError("edge shared by two equally oriented triangles");
            directed[key] = 1;
        }
    }
    std::set<std::pair<int, int>> boundary_edges;
    for (const auto& t : triangles_) {
        for (int i = 0; i < 3; ++i) {
            const int a = t[i], b = t[(i + 1) % 3];
            if (!directed.count(edge_key(b, a))) boundary_edges.insert({a, b});
        }
    }

    const int nb = static_cast<int>(boundary_.size());
    if (nb < 3) throw GeometryError("boundary polygon needs at least three nodes");
    if (static_cast<int>(boundary_edges.size()) != nb)
        throw GeometryError("boundary polygon does not match the mesh boundary");
    on_boundary_.assign(n, 0);
    for (int i = 0; i < nb; ++i) {
        const int a = boundary_[i], b = boundary_[(i + 1) % nb];
        if (a < 0 || a >= n) throw GeometryError("boundary polygon has an invalid node index");
        if (on_boundary_[a]) throw GeometryError("boundary polygon visits a node twice");
        on_boundary_[a] = 1;
        if (!boundary_edges.count({a, b})) throw GeometryError("boundary polygon is not a counterclockwise mesh boundary loop");
    }
    for (int i = 0; i < n; ++i) {
        if (markers_[i] == NodeMarker::dirichlet && !on_boundary_[i])
            throw GeometryError("Dirichlet marker on interior node " + std::to_string(i));
    }
    if (!polygon_is_simple(nodes_, boundary_)) throw GeometryError("boundary polygon self-intersects");
}

std::array<Eigen::Vector2d, 3> Mesh::basis_gradients(int k) const
{
    const auto& t = triangles_[k];
    const Point &a = nodes_[t[0]], &b = nodes_[t[1]], &c = nodes_[t[2]];
    const double two_area = 2.0 * areas_[k];
    // grad(lambda_i) = rot90(opposite edge) / (2|K|)
    return {Eigen::Vector2d(b.y() - c.y(), c.x() - b.x()) / two_area,
            Eigen::Vector2d(c.y() - a.y(), a.x() - c.x()) / two_area,
            Eigen::Vector2d(a.y() - b.y(), b.x() - a.x()) / two_area};
}

double Mesh::area() const
{
    double s = 0.0;
    for (double a : areas_) s += a;
    return s;
}

double Mesh::polygon_area() const
{
    double s = 0.0;
    const int nb = static_cast<int>(boundary_.size());
    for (int i = 0; i < nb; ++i) s += cross(nodes_[boundary_[i]], nodes_[boundary_[(i + 1) % nb]]);
    return 0.5 * s;
}

std::vector<int> Mesh::dirichlet_nodes() const
{
    std::vector<int> out;
    for (int i = 0; i < num_nodes(); ++i) {
        if (markers_[i] == NodeMarker::dirichlet) out.push_back(i);
    }
    return out;
}

std::optional<Location> Mesh::locate(const Point& x, double tol) const
{
    for (int k = 0; k < num_triangles(); ++k) {
        const auto& t = triangles_[k];
        const Point &a = nodes_[t[0]], &b = nodes_[t[1]], &c = nodes_[t[2]];
        const double lo_x = std::min({a.x(), b.x(), c.x()}), hi_x = std::max({a.x(), b.x(), c.x()});
        const double lo_y = std::min({a.y(), b.y(), c.y()}), hi_y = std::max({a.y(), b.y(), c.y()});
        const double pad = tol * (hi_x - lo_x + hi_y - lo_y);
        if (x.x() < lo_x - pad || x.x() > hi_x + pad || x.y() < lo_y - pad || x.y() > hi_y + pad) continue;

        const double area = areas_[k];
        std::array<double, 3> bary{signed_area(x, b, c) / area, signed_area(a, x, c) / area,
                                   signed_area(a, b, x) / area};
        if (bary[0] >= -tol && bary[1] >= -tol && bary[2] >= -tol) {
            for (double& l : bary) l = std::max(l, 0.0);
            const double s = bary[0] + bary[1] + bary[2];
            for (double& l : bary) l /= s;
            return Location{k, bary};
        }
    }
    return std::nullopt;
}

Location Mesh::locate_or_throw(const Point& x) const
{
    auto loc = locate(x);
    if (!loc) {
        throw PointLocationError("point (" + std::to_string(x.x()) + ", " + std::to_string(x.y())
                                 + ") lies outside the mesh");
    }
    return *loc;
}

Mesh Mesh::with_nodes(std::vector<Point> nodes) const
{
    if (nodes.size() != nodes_.size()) throw GeometryError("node count mismatch in with_nodes");
    return Mesh(std::move(nodes), triangles_, boundary_, markers_);
}

MeshQualityReport assess_quality(const std::vector<Point>& nodes, const std::vector<Triangle>& triangles,
                                 const std::vector<int>& boundary, const QualityFloors& floors)
{
    MeshQualityReport r;
    r.min_area = std::numeric_limits<double>::infinity();
    r.min_angle = std::numeric_limits<double>::infinity();
    r.max_aspect = 0.0;
    for (const auto& t : triangles) {
        const Point &a = nodes[t[0]], &b = nodes[t[1]], &c = nodes[t[2]];
        const double area = signed_area(a, b, c);
        r.min_area = std::min(r.min_area, area);
        // inverted elements report a zero angle so that they fail the angle floor as well
        r.min_angle = std::min(r.min_angle, area > 0.0 ? triangle_min_angle(a, b, c) : 0.0);
        r.max_aspect = std::max(r.max_aspect, triangle_aspect(a, b, c));
    }
    r.boundary_simple = polygon_is_simple(nodes, boundary);
    r.is_valid = r.min_area > floors.area_floor && r.min_angle > floors.angle_floor && r.boundary_simple;
    return r;
}

MeshQualityReport assess_quality(const Mesh& mesh, const QualityFloors& floors)
{
    return assess_quality(mesh.nodes(), mesh.triangles(), mesh.boundary(), floors);
}

Mesh make_square_mesh(int n)
{
    if (n < 2) throw GeometryError("square mesh needs n >= 2 subdivisions");
    const int m = n + 1;
    std::vector<Point> nodes;
    nodes.reserve(m * m);
    for (int j = 0; j < m; ++j) {
        for (int i = 0; i < m; ++i) nodes.emplace_back(static_cast<double>(i) / n, static_cast<double>(j) / n);
    }
    auto id = [m](int i, int j) { return j * m + i; };
    std::vector<Triangle> tris;
    tris.reserve(2 * n * n);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            tris.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
            tris.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
        }
    }
    std::vector<int> boundary;
    for (int i = 0; i < n; ++i) boundary.push_back(id(i, 0));
    for (int j = 0; j < n; ++j) boundary.push_back(id(n, j));
    for (int i = n; i > 0; --i) boundary.push_back(id(i, n));
    for (int j = n; j > 0; --j) boundary.push_back(id(0, j));
    return Mesh(std::move(nodes), std::move(tris), std::move(boundary));
}

namespace {
    /// Incremental Delaunay builder over a convex boundary polygon. Neighbor
    /// slot i of a triangle is the triangle across the edge opposite vertex i.
    class DelaunayBuilder {
    public:
        DelaunayBuilder(std::vector<Point> polygon, double scale) : pts_(std::move(polygon)), scale_(scale)
        {
            const int n = static_cast<int>(pts_.size());
            for (int i = 1; i + 1 < n; ++i) tris_.push_back({0, i, i + 1});
            rebuild_neighbors();
            make_delaunay();
        }

        void insert(Point p)
        {
            int t = locate(p);
            auto bary = barycentric(t, p);
            const double min_bary = std::min({bary[0], bary[1], bary[2]});
            if (min_bary < 1e-9) {
                // nudge a point sitting on an edge into the interior; the resulting
                // sliver is removed by the flips below
                const auto& tri = tris_[t];
                const Point centroid = (pts_[tri[0]] + pts_[tri[1]] + pts_[tri[2]]) / 3.0;
                const double s = (1e-9 - min_bary) / (1.0 / 3.0 - min_bary) + 1e-12;
                p = (1.0 - s) * p + s * centroid;
            }
            const int pi = static_cast<int>(pts_.size());
            pts_.push_back(p);

            const auto [a, b, c] = tris_[t];
            const auto [na, nb, nc] = nbrs_[t];
            const int t1 = static_cast<int>(tris_.size());
            const int t2 = t1 + 1;
            tris_[t] = {pi, b, c};
            nbrs_[t] = {na, t1, t2};
            tris_.push_back({a, pi, c});
            nbrs_.push_back({t, nb, t2});
            tris_.push_back({a, b, pi});
            nbrs_.push_back({t, t1, nc});
            replace_neighbor(nb, t, t1);
            replace_neighbor(nc, t, t2);
            last_ = t;

            std::vector<std::pair<int, int>> stack{{t, 0}, {t1, 1}, {t2, 2}};
            while (!stack.empty()) {
                auto [tri, i] = stack.back();
                stack.pop_back();
                if (needs_flip(tri, i)) {
                    const int u = nbrs_[tri][i];
                    flip(tri, i);
                    stack.push_back({tri, 0});
                    stack.push_back({u, 0});
                }
            }
        }

        const std::vector<Point>& points() const { return pts_; }
        const std::vector<Triangle>& triangles() const { return tris_; }

    private:
        void rebuild_neighbors()
        {
            nbrs_.assign(tris_.size(), {-1, -1, -1});
            std::map<std::pair<int, int>, std::pair<int, int>> edges;
            for (int k = 0; k < static_cast<int>(tris_.size()); ++k) {
                for (int i = 0; i < 3; ++i) {
                    const int a = tris_[k][(i + 1) % 3], b = tris_[k][(i + 2) % 3];
                    auto it = edges.find({b, a});
                    if (it != edges.end()) {
                        nbrs_[k][i] = it->second.first;
                        nbrs_[it->second.first][it->second.second] = k;
                    } else {
                        edges[{a, b}] = {k, i};
                    }
                }
            }
        }

        void make_delaunay()
        {
            bool changed = true;
            while (changed) {
                changed = false;
                for (int k = 0; k < static_cast<int>(tris_.size()); ++k) {
                    for (int i = 0; i < 3; ++i) {
                        if (needs_flip(k, i)) {
                            flip(k, i);
                            changed = true;
                        }
                    }
                }
            }
        }

        static double orient(const Point& a, const Point& b, const Point& c) { return cross(b - a, c - a); }

        bool in_circle(const Point& a, const Point& b, const Point& c, const Point& d) const
        {
            const double adx = a.x() - d.x(), ady = a.y() - d.y();
            const double bdx = b.x() - d.x(), bdy = b.y() - d.y();
            const double cdx = c.x() - d.x(), cdy = c.y() - d.y();
            const double det = (adx * adx + ady * ady) * (bdx * cdy - cdx * bdy)
                - (bdx * bdx + bdy * bdy) * (adx * cdy - cdx * ady) + (cdx * cdx + cdy * cdy) * (adx * bdy - bdx * ady);
            return det > 1e-12 * scale_ * scale_ * scale_ * scale_;
        }

        bool needs_flip(int t, int i) const
        {
            const int u = nbrs_[t][i];
            if (u < 0) return false;
            const auto& tri = tris_[t];
            const int d = opposite_vertex(u, tri[(i + 1) % 3], tri[(i + 2) % 3]);
            const Point &pa = pts_[tri[i]], &pb = pts_[tri[(i + 1) % 3]], &pc = pts_[tri[(i + 2) % 3]];
            const Point& pd = pts_[d];
            if (!in_circle(pa, pb, pc, pd)) return false;
            // the flipped pair must stay positively oriented
            return orient(pa, pb, pd) > 0.0 && orient(pa, pd, pc) > 0.0;
        }

        int opposite_vertex(int u, int b, int c) const
        {
            for (int v : tris_[u]) {
                if (v != b && v != c) return v;
            }
            return -1;
        }

        void replace_neighbor(int tri, int from, int to)
        {
            if (tri < 0) return;
            for (int& n : nbrs_[tri]) {
                if (n == from) n = to;
            }
        }

        void flip(int t, int i)
        {
            const int a = tris_[t][i], b = tris_[t][(i + 1) % 3], c = tris_[t][(i + 2) % 3];
            const int u = nbrs_[t][i];
            int j = 0;
            while (tris_[u][j] == b || tris_[u][j] == c) ++j;
            const int d = tris_[u][j];
            const int n_tb = nbrs_[t][(i + 1) % 3], n_tc = nbrs_[t][(i + 2) % 3];
            const int n_uc = nbrs_[u][(j + 1) % 3], n_ub = nbrs_[u][(j + 2) % 3];

            tris_[t] = {a, b, d};
            nbrs_[t] = {n_uc, u, n_tc};
            tris_[u] = {a, d, c};
            nbrs_[u] = {n_ub, n_tb, t};
            replace_neighbor(n_uc, u, t);
            replace_neighbor(n_tb, t, u);
        }

        std::array<double, 3> barycentric(int t, const Point& p) const
        {
            const auto& tri = tris_[t];
            const Point &a = pts_[tri[0]], &b = pts_[tri[1]], &c = pts_[tri[2]];
            const double area = orient(a, b, c);
            return {orient(p, b, c) / area, orient(a, p, c) / area, orient(a, b, p) / area};
        }

        int locate(const Point& p) const
        {
            int t = last_;
            for (std::size_t step = 0; step < 4 * tris_.size() + 8; ++step) {
                const auto& tri = tris_[t];
                int next = -1;
                for (int i = 0; i < 3; ++i) {
                    if (orient(pts_[tri[(i + 1) % 3]], pts_[tri[(i + 2) % 3]], p) < 0.0) {
                        next = nbrs_[t][i];
                        break;
                    }
                }
                if (next == -1) {
                    auto bary = barycentric(t, p);
                    if (std::min({bary[0], bary[1], bary[2]}) >= -1e-12) return t;
                    break;
                }
                t = next;
            }
            int best = 0;
            double best_min = -std::numeric_limits<double>::infinity();
            for (int k = 0; k < static_cast<int>(tris_.size()); ++k) {
                auto bary = barycentric(k, p);
                const double m = std::min({bary[0], bary[1], bary[2]});
                if (m > best_min) {
                    best_min = m;
                    best = k;
                }
            }
            if (best_min < -1e-9) throw GeometryError("insertion point outside the boundary polygon");
            return best;
        }

        std::vector<Point> pts_;
        std::vector<Triangle> tris_;
        std::vector<std::array<int, 3>> nbrs_;
        double scale_;
        int last_ = 0;
    };
} // namespace

Mesh make_disk_mesh(const Point& center, double radius, int n_boundary, double target_h)
{
    if (!(radius > 0.0)) throw GeometryError("disk radius must be positive");
    if (n_boundary < 8) throw GeometryError("disk mesh needs at least 8 boundary nodes");
    if (!(target_h > 0.0)) throw GeometryError("target element size must be positive");

    std::vector<Point> polygon;
    polygon.reserve(n_boundary);
    for (int i = 0; i < n_boundary; ++i) {
        const double theta = 2.0 * std::numbers::pi * i / n_boundary;
        polygon.emplace_back(center.x() + radius * std::cos(theta), center.y() + radius * std::sin(theta));
    }
    DelaunayBuilder builder(polygon, radius);

    // hexagonal lattice clipped against the inscribed polygon with a margin
    const double spacing = 2.0 * std::numbers::pi * radius / n_boundary;
    const double inner = radius * std::cos(std::numbers::pi / n_boundary);
    const double margin = 0.5 * std::max(target_h, spacing);
    const double row = target_h * std::sqrt(3.0) / 2.0;
    const int rows = static_cast<int>(std::ceil(radius / row));
    const int cols = static_cast<int>(std::ceil(radius / target_h)) + 1;
    for (int j = -rows; j <= rows; ++j) {
        const double offset = (std::abs(j) % 2) * 0.5 * target_h;
        for (int i = -cols; i <= cols; ++i) {
            const Point p(center.x() + i * target_h + offset, center.y() + j * row);
            if ((p - center).norm() < inner - margin) builder.insert(p);
        }
    }

    std::vector<int> boundary(n_boundary);
    for (int i = 0; i < n_boundary; ++i) boundary[i] = i;
    return Mesh(builder.points(), builder.triangles(), std::move(boundary));
}

} // namespace maxshape
