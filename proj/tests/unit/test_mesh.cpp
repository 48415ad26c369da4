#include <maxshape/deform.hpp>
#include <maxshape/errors.hpp>
#include <maxshape/mesh.hpp>

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace maxshape;

namespace {
double triangle_area_sum(const Mesh& m)
{
    double s = 0.0;
    for (int k = 0; k < m.num_triangles(); ++k) s += m.element_area(k);
    return s;
}
} // namespace

TEST_SUITE("geometry")
{
    TEST_CASE("square mesh counts")
    {
        const Mesh m2 = make_square_mesh(2);
        CHECK(m2.num_nodes() == 9);
        CHECK(m2.num_triangles() == 8);
        CHECK(m2.area() == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(make_square_mesh(4).boundary().size() == 16);

        const Mesh m = make_square_mesh(5);
        CHECK(m.h_max() == doctest::Approx(std::sqrt(2.0) / 5));
        for (int i = 0; i < m.num_nodes(); ++i) {
            const Point& x = m.node(i);
            const bool edge = x.x() == 0.0 || x.x() == 1.0 || x.y() == 0.0 || x.y() == 1.0;
            CHECK(m.on_boundary(i) == edge);
            CHECK((m.marker(i) == NodeMarker::interior) == !edge);
        }
        CHECK_THROWS_AS(make_square_mesh(1), GeometryError);
    }

    TEST_CASE("octagon area")
    {
        const Mesh m = make_disk_mesh({0.0, 0.0}, 1.0, 8, 0.5);
        CHECK(m.polygon_area() == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-14));
        CHECK(std::abs(triangle_area_sum(m) - m.polygon_area()) <= 1e-12);
    }

    TEST_CASE("disk triangulation partitions the polygon")
    {
        for (auto [r, nb, h] : {std::tuple{1.5, 200, 0.08}, std::tuple{1.0, 64, 0.1}, std::tuple{0.3, 17, 0.05}}) {
            const Mesh m = make_disk_mesh({0.5, 0.5}, r, nb, h);
            CHECK(std::abs(triangle_area_sum(m) - m.polygon_area()) <= 1e-12);
            CHECK(static_cast<int>(m.boundary().size()) == nb);
            for (int i = 0; i < nb; ++i) {
                const double theta = 2.0 * std::numbers::pi * i / nb;
                CHECK((m.node(m.boundary()[i]) - Point(0.5 + r * std::cos(theta), 0.5 + r * std::sin(theta))).norm() < 1e-14);
            }
            CHECK(assess_quality(m).is_valid);
        }
    }

    TEST_CASE("initial disk resolution")
    {
        // 400 boundary nodes at radius sqrt(6) with roughly 5500 nodes in total
        const Mesh m = make_disk_mesh({0.5, 0.5}, std::sqrt(6.0), 400, 0.065);
        CHECK(m.boundary().size() == 400);
        CHECK(m.num_nodes() > 5000);
        CHECK(m.num_nodes() < 6000);
        CHECK(assess_quality(m).max_aspect < 10.0);
    }

    TEST_CASE("disk argument errors")
    {
        CHECK_THROWS_AS(make_disk_mesh({0, 0}, 0.0, 16, 0.1), GeometryError);
        CHECK_THROWS_AS(make_disk_mesh({0, 0}, -1.0, 16, 0.1), GeometryError);
        CHECK_THROWS_AS(make_disk_mesh({0, 0}, 1.0, 7, 0.1), GeometryError);
    }

    TEST_CASE("constructor rejects broken invariants")
    {
        const std::vector<Point> pts{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
        CHECK_NOTHROW(Mesh(pts, {{0, 1, 2}, {0, 2, 3}}, {0, 1, 2, 3}));
        // clockwise triangle
        CHECK_THROWS_AS(Mesh(pts, {{0, 2, 1}, {0, 2, 3}}, {0, 1, 2, 3}), GeometryError);
        // boundary loop in the wrong order
        CHECK_THROWS_AS(Mesh(pts, {{0, 1, 2}, {0, 2, 3}}, {0, 3, 2, 1}), GeometryError);
        // interior node marked Dirichlet
        const std::vector<Point> five{{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0.5, 0.5}};
        const std::vector<Triangle> fan{{0, 1, 4}, {1, 2, 4}, {2, 3, 4}, {3, 0, 4}};
        std::vector<NodeMarker> marks(5, NodeMarker::dirichlet);
        CHECK_THROWS_AS(Mesh(five, fan, {0, 1, 2, 3}, marks), GeometryError);
        marks[4] = NodeMarker::interior;
        CHECK_NOTHROW(Mesh(five, fan, {0, 1, 2, 3}, marks));
    }

    TEST_CASE("polygon simplicity")
    {
        const std::vector<Point> pts{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
        CHECK(polygon_is_simple(pts, {0, 1, 2, 3}));
        CHECK_FALSE(polygon_is_simple(pts, {0, 2, 1, 3}));
    }

    TEST_CASE("point location ties go to the lowest triangle")
    {
        const Mesh m = make_square_mesh(2);
        const auto loc = m.locate(m.node(4));
        REQUIRE(loc.has_value());
        for (int k = 0; k < loc->triangle; ++k) {
            const auto& t = m.triangle(k);
            CHECK(std::find(t.begin(), t.end(), 4) == t.end());
        }
        CHECK_FALSE(m.locate({1.5, 0.5}).has_value());
        CHECK_THROWS_AS(m.locate_or_throw({1.5, 0.5}), PointLocationError);
    }

    TEST_CASE("zero step is the identity")
    {
        auto m = std::make_shared<const Mesh>(make_disk_mesh({0.5, 0.5}, 1.0, 32, 0.15));
        const VecField g = VecField::interpolate(m, [](const Point& x) { return Eigen::Vector2d(x.y(), -x.x()); });
        for (auto mode : {DeformMode::direct, DeformMode::harmonic}) {
            const DeformResult r = deform_mesh(*m, g, 0.0, mode);
            REQUIRE(r.valid());
            CHECK(r.mesh->nodes() == m->nodes());
        }
    }

    TEST_CASE("constant field translates rigidly")
    {
        auto m = std::make_shared<const Mesh>(make_disk_mesh({0.5, 0.5}, 1.0, 32, 0.15));
        const Eigen::Vector2d c(0.3, -0.7);
        const VecField g = VecField::interpolate(m, [&](const Point&) { return c; });
        const DeformResult r = deform_mesh(*m, g, 0.5, DeformMode::direct);
        REQUIRE(r.valid());
        for (int i = 0; i < m->num_nodes(); ++i) CHECK((r.mesh->node(i) - m->node(i) - 0.5 * c).norm() < 1e-14);
        for (int k = 0; k < m->num_triangles(); ++k)
            CHECK(r.mesh->element_area(k) == doctest::Approx(m->element_area(k)).epsilon(1e-12));
        CHECK(r.mesh->triangles() == m->triangles());
        CHECK(r.mesh->markers() == m->markers());
    }

    TEST_CASE("harmonic extension with fixed boundary keeps the mesh")
    {
        auto m = std::make_shared<const Mesh>(make_disk_mesh({0.5, 0.5}, 1.0, 32, 0.15));
        VecField g = VecField::interpolate(m, [](const Point& x) { return Eigen::Vector2d(x.x() * x.y(), 1.0); });
        for (int i : m->boundary()) g.coeffs.segment<2>(2 * i).setZero();
        const DeformResult r = deform_mesh(*m, g, 1.0, DeformMode::harmonic);
        REQUIRE(r.valid());
        CHECK(r.mesh->nodes() == m->nodes());
    }

    TEST_CASE("harmonic mode moves the boundary pointwise")
    {
        auto m = std::make_shared<const Mesh>(make_disk_mesh({0.5, 0.5}, 1.0, 32, 0.15));
        const VecField g = VecField::interpolate(m, [](const Point& x) { return Eigen::Vector2d(0.1 * x.x(), -0.05 * x.y() * x.y()); });
        const DeformResult r = deform_mesh(*m, g, 0.7, DeformMode::harmonic);
        REQUIRE(r.valid());
        for (int i : m->boundary()) CHECK((r.mesh->node(i) - m->node(i) - 0.7 * g.at_node(i)).norm() < 1e-14);
        CHECK(assess_quality(*r.mesh).is_valid);
    }

    TEST_CASE("large steps are rejected with a report")
    {
        auto m = std::make_shared<const Mesh>(make_disk_mesh({0.5, 0.5}, 1.0, 32, 0.15));
        const VecField g = VecField::interpolate(m, [](const Point& x) { return Eigen::Vector2d(std::sin(7.0 * x.y()), 0.0); });
        double t = 0.01;
        DeformResult r = deform_mesh(*m, g, t, DeformMode::direct);
        while (r.valid() && t < 100.0) {
            t *= 2.0;
            r = deform_mesh(*m, g, t, DeformMode::direct);
        }
        REQUIRE_FALSE(r.valid());
        // oracle: signed areas recomputed from the displaced coordinates
        double min_signed = std::numeric_limits<double>::infinity();
        for (const auto& tri : m->triangles()) {
            std::array<Point, 3> p;
            for (int a = 0; a < 3; ++a) p[a] = m->node(tri[a]) + t * g.at_node(tri[a]);
            min_signed = std::min(min_signed, 0.5 * ((p[1] - p[0]).x() * (p[2] - p[0]).y() - (p[1] - p[0]).y() * (p[2] - p[0]).x()));
        }
        const bool inverted = min_signed <= QualityFloors{}.area_floor;
        CHECK((inverted || r.report.min_angle <= QualityFloors{}.angle_floor || !r.report.boundary_simple));
        if (inverted) CHECK(r.report.min_area <= QualityFloors{}.area_floor);
        CHECK_THROWS_AS(deform_mesh(*m, g, -1.0), GeometryError);
    }

    TEST_CASE("quality of a valid mesh is stable under re-assessment")
    {
        const Mesh m = make_disk_mesh({0.0, 0.0}, 2.0, 48, 0.3);
        const MeshQualityReport a = assess_quality(m);
        const Mesh copy = m.with_nodes(m.nodes());
        const MeshQualityReport b = assess_quality(copy);
        CHECK(a.is_valid);
        CHECK(b.is_valid);
        CHECK(a.min_area == b.min_area);
        CHECK(a.min_angle > 0.0);
        CHECK(a.max_aspect >= 1.0);
    }
}
