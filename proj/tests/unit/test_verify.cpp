#include <maxshape/errors.hpp>
#include <maxshape/verify.hpp>

#include <doctest.h>

#include <cmath>

using namespace maxshape;

TEST_SUITE("verify")
{
    TEST_CASE("fitted order")
    {
        CHECK(fitted_order({1.0, 0.5, 0.25}, {3.0, 0.75, 0.1875}) == doctest::Approx(2.0));
        CHECK(fitted_order({1.0, 2.0, 4.0}, {5.0, 5.0, 5.0}) == doctest::Approx(0.0));
    }

    TEST_CASE("Hausdorff distance to a rectangle")
    {
        const Mesh sq = make_square_mesh(4);
        CHECK(hausdorff_to_rectangle(sq, {0, 0}, {1, 1}) < 1e-14);
        CHECK(hausdorff_to_rectangle(sq, {-1, -1}, {2, 2}) == doctest::Approx(std::sqrt(2.0)));
        const Mesh d = make_disk_mesh({0.5, 0.5}, 0.5, 64, 0.1);
        // worst case is the square corner, sqrt(2)/2 - 1/2 from the circle
        CHECK(hausdorff_to_rectangle(d, {0, 0}, {1, 1}) == doctest::Approx(std::sqrt(0.5) - 0.5).epsilon(1e-3));
    }

    TEST_CASE("Taylor remainders with a zero field vanish")
    {
        const auto m = std::make_shared<const Mesh>(make_square_mesh(8));
        const TaylorReport r = taylor_test(toy_problem(), m, TaylorCost::l2, VecField::zero(m), {0.5, 0.5}, 0.1, 4);
        CHECK(r.derivative == 0.0);
        for (double v : r.remainders) CHECK(v == 0.0);
    }

    TEST_CASE("Taylor orders")
    {
        const auto m = std::make_shared<const Mesh>(make_disk_mesh({0.45, 0.5}, 1.0, 40, 0.15));
        const VecField X = VecField::interpolate(m, [](const Point& x) { return Eigen::Vector2d(0.1 * std::sin(2.0 * x.x() + x.y()), 0.1 * std::cos(x.x() - 2.0 * x.y())); });
        for (auto cost : {TaylorCost::l2, TaylorCost::j_at_y}) {
            const TaylorReport r = taylor_test(toy_problem(), m, cost, X, m->node(m->num_nodes() - 1), 0.25, 6);
            CHECK(r.steps.size() == 6);
            CHECK(r.order > 1.8);
        }
    }

    TEST_CASE("Danskin slope")
    {
        const auto m = std::make_shared<const Mesh>(make_disk_mesh({0.4, 0.55}, 1.0, 48, 0.12));
        const VecField zero = VecField::zero(m);
        const DanskinReport z = danskin_check(toy_problem(), m, zero, 1e-3);
        CHECK(z.fd_slope == 0.0);
        CHECK(z.predicted == 0.0);
        const VecField X = VecField::interpolate(m, [](const Point& x) { return Eigen::Vector2d(0.2 * x.x(), -0.1); });
        const DanskinReport a = danskin_check(toy_problem(), m, X, 1e-3);
        const DanskinReport b = danskin_check(toy_problem(), m, X, 5e-4);
        if (a.argmax_count == 1) CHECK(b.discrepancy < a.discrepancy);
    }

    TEST_CASE("Green function symmetry")
    {
        const auto m = std::make_shared<const Mesh>(make_disk_mesh({0.0, 0.0}, 1.0, 40, 0.15));
        CHECK(reciprocity_check(m, {0.1, 0.2}, {0.1, 0.2}) == 0.0);
        CHECK(reciprocity_check(m, {0.1, 0.2}, {-0.4, 0.3}) < 1e-12);
        CHECK(green_value(m, {0.1, 0.2}, {-0.4, 0.3}) > 0.0);
        CHECK(green_value(m, m->node(m->boundary()[0]), {0.0, 0.0}) == 0.0);
        CHECK_THROWS_AS(green_value(m, {3.0, 0.0}, {0.0, 0.0}), PointLocationError);
    }

    TEST_CASE("convergence study")
    {
        const ConvergenceReport z = convergence_study({4, 8}, "zero");
        for (double e : z.l2_errors) CHECK(e == 0.0);
        const ConvergenceReport r = convergence_study({8, 16, 32});
        CHECK(r.l2_errors[2] < r.l2_errors[0]);
        CHECK(r.l2_rate > 1.9);
        CHECK(r.h.size() == 3);
    }

    TEST_CASE("suite names")
    {
        const auto rows = run_verify_suite("reciprocity");
        REQUIRE_FALSE(rows.empty());
        for (const auto& r : rows) CHECK(r.pass);
        CHECK_THROWS_AS(run_verify_suite("nonsense"), ConfigError);
    }
}
