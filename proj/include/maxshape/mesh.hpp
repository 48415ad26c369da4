#pragma once

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

namespace maxshape {

using Point = Eigen::Vector2d;
using Triangle = std::array<int, 3>;

enum class NodeMarker : std::uint8_t { interior, dirichlet };

/// Acceptance floors for deformed meshes. Angles are in radians.
struct QualityFloors {
    double area_floor = 1e-10;
    double angle_floor = 3.14159265358979323846 / 180.0;

    bool operator==(const QualityFloors&) const = default;
};

struct MeshQualityReport {
    double min_area = 0.0;
    double min_angle = 0.0;
    /// max over elements of diameter / inscribed-circle diameter
    double max_aspect = 0.0;
    bool boundary_simple = true;
    bool is_valid = false;
};

/// Triangle hit by point location together with the barycentric coordinates
/// of the query point in that triangle.
struct Location {
    int triangle = -1;
    std::array<double, 3> bary{};
};

/// Planar P1 triangulation with an ordered counterclockwise boundary polygon.
///
/// A Mesh is immutable. Construction checks orientation of every triangle, that
/// the boundary loop is closed, simple and coincides with the topological
/// boundary of the triangulation, and that Dirichlet markers sit on it.
class Mesh {
public:
    Mesh(std::vector<Point> nodes, std::vector<Triangle> triangles, std::vector<int> boundary,
         std::vector<NodeMarker> markers);

    /// Same as above with every boundary node marked Dirichlet.
    Mesh(std::vector<Point> nodes, std::vector<Triangle> triangles, std::vector<int> boundary);

    int num_nodes() const { return static_cast<int>(nodes_.size()); }
    int num_triangles() const { return static_cast<int>(triangles_.size()); }

    const Point& node(int i) const { return nodes_[i]; }
    const std::vector<Point>& nodes() const { return nodes_; }
    const Triangle& triangle(int k) const { return triangles_[k]; }
    const std::vector<Triangle>& triangles() const { return triangles_; }
    const std::vector<int>& boundary() const { return boundary_; }
    const std::vector<NodeMarker>& markers() const { return markers_; }
    NodeMarker marker(int i) const { return markers_[i]; }
    bool is_dirichlet(int i) const { return markers_[i] == NodeMarker::dirichlet; }
    bool on_boundary(int i) const { return on_boundary_[i] != 0; }

    double element_area(int k) const { return areas_[k]; }
    /// Constant gradients of the three barycentric basis functions on element k.
    std::array<Eigen::Vector2d, 3> basis_gradients(int k) const;
    double h_max() const { return h_max_; }
    double area() const;
    double polygon_area() const;

    std::vector<int> dirichlet_nodes() const;

    /// Brute-force scan in index order, so a point on a shared edge or vertex
    /// resolves to the lowest-indexed triangle containing it.
    std::optional<Location> locate(const Point& x, double tol = 1e-12) const;
    /// Throws PointLocationError when x is outside the mesh.
    Location locate_or_throw(const Point& x) const;

    /// New mesh with the same connectivity and markers at moved node positions.
    /// Throws GeometryError when an invariant breaks.
    Mesh with_nodes(std::vector<Point> nodes) const;

private:
    void validate();

    std::vector<Point> nodes_;
    std::vector<Triangle> triangles_;
    std::vector<int> boundary_;
    std::vector<NodeMarker> markers_;
    std::vector<char> on_boundary_;
    std::vector<double> areas_;
    double h_max_ = 0.0;
};

using MeshPtr = std::shared_ptr<const Mesh>;

double signed_area(const Point& a, const Point& b, const Point& c);

MeshQualityReport assess_quality(const std::vector<Point>& nodes, const std::vector<Triangle>& triangles,
                                 const std::vector<int>& boundary, const QualityFloors& floors = {});
MeshQualityReport assess_quality(const Mesh& mesh, const QualityFloors& floors = {});

/// True when the closed polygon through pts[loop[0]], pts[loop[1]], ... has no
/// two non-adjacent edges that touch.
bool polygon_is_simple(const std::vector<Point>& pts, const std::vector<int>& loop);

/// Regular n_boundary-gon inscribed in the circle, interior filled with a
/// clipped uniform grid of spacing target_h and made Delaunay by edge flips.
Mesh make_disk_mesh(const Point& center, double radius, int n_boundary, double target_h);

/// Uniform right-triangle mesh of the unit square with (n+1)^2 nodes.
Mesh make_square_mesh(int n);

} // namespace maxshape
