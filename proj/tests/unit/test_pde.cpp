#include <maxshape/errors.hpp>
#include <maxshape/pde.hpp>
#include <maxshape/problem.hpp>

#include <doctest.h>

#include <cmath>

using namespace maxshape;

namespace {
MeshPtr square(int n) { return std::make_shared<const Mesh>(make_square_mesh(n)); }
MeshPtr disk() { return std::make_shared<const Mesh>(make_disk_mesh({0.5, 0.5}, 1.0, 48, 0.12)); }
} // namespace

TEST_SUITE("pde")
{
    TEST_CASE("diffusion laws")
    {
        CHECK_NOTHROW(DiffusionLaw::unit().validate());
        const DiffusionLaw sat = DiffusionLaw::saturating();
        CHECK_NOTHROW(sat.validate());
        CHECK(sat.beta(0.0) == 1.0);
        CHECK(sat.beta(1.0) == doctest::Approx(1.5));
        CHECK(sat.dbeta(1.0) == doctest::Approx((sat.beta(1.0 + 1e-6) - sat.beta(1.0 - 1e-6)) / 2e-6).epsilon(1e-8));
        CHECK(DiffusionLaw::by_name("saturating").name == "saturating");
        CHECK_THROWS_AS(DiffusionLaw::by_name("cubic"), ConfigError);

        DiffusionLaw bad = DiffusionLaw::unit();
        bad.beta = [](double s) { return 1.0 - 0.5 * s / (1.0 + s); };
        bad.beta_lo = 0.5;
        CHECK_THROWS_AS(bad.validate(), ConfigError);
    }

    TEST_CASE("zero load gives zero state")
    {
        for (const auto& law : {DiffusionLaw::unit(), DiffusionLaw::saturating()}) {
            const StateSolution s = solve_state(disk(), [](const Point&) { return 0.0; }, law);
            CHECK(s.u.coeffs.cwiseAbs().maxCoeff() == 0.0);
        }
    }

    TEST_CASE("state vanishes on the Dirichlet boundary")
    {
        const auto m = disk();
        const Problem p = toy_problem();
        const StateSolution s = solve_state(m, p.f, p.law);
        for (int i : m->boundary()) CHECK(s.u.coeffs[i] == 0.0);
        CHECK(s.picard_iterations <= 1);
    }

    TEST_CASE("linear state satisfies the energy identity")
    {
        const auto m = disk();
        const Problem p = toy_problem();
        const ScalarField u = solve_state(m, p.f, p.law, {{1e-13, 0}, 1e-12, 100}).u;
        const SparseMatrix A = assemble_operator(*m, 1.0, 1.0);
        const Vector b = assemble_load(*m, p.f);
        CHECK(u.coeffs.dot(A * u.coeffs) == doctest::Approx(b.dot(u.coeffs)).epsilon(1e-10));
        CHECK(state_residual(u, p.f, p.law) < 1e-10);
    }

    TEST_CASE("manufactured solution on the unit square")
    {
        const Problem p = toy_problem();
        double prev = 1.0;
        for (int n : {8, 16, 32}) {
            const auto m = square(n);
            const ScalarField u = solve_state(m, p.f, p.law).u;
            double err = 0.0;
            for (int i = 0; i < m->num_nodes(); ++i) err = std::max(err, std::abs(u.coeffs[i] - manufactured_solution(m->node(i))));
            CHECK(err < prev / 3.0);
            prev = err;
        }
    }

    TEST_CASE("Picard iteration for the saturating law")
    {
        const auto m = disk();
        const Problem p = toy_problem(DiffusionLaw::saturating());
        const StateSolution s = solve_state(m, p.f, p.law, {{1e-13, 0}, 1e-11, 100});
        CHECK(s.picard_iterations > 1);
        CHECK(s.final_increment <= 1e-11);
        CHECK(state_residual(s.u, p.f, p.law) < 1e-9);
        const StateSolution lin = solve_state(m, p.f, DiffusionLaw::unit());
        // stronger diffusion shrinks the solution
        CHECK(s.u.coeffs.cwiseAbs().maxCoeff() < lin.u.coeffs.cwiseAbs().maxCoeff());

        try {
            solve_state(m, p.f, p.law, {{1e-13, 0}, 1e-14, 2});
            FAIL("expected SolverError");
        } catch (const SolverError& e) {
            CHECK(e.history().size() == 2);
        }
    }

    TEST_CASE("linearised tensor")
    {
        const DiffusionLaw law = DiffusionLaw::saturating();
        const Eigen::Vector2d g(0.3, -1.2);
        const Eigen::Matrix2d T = law.linearized_tensor(g);
        const double s = g.squaredNorm();
        // oracle: derivative of beta(|p|^2) p along a direction
        const Eigen::Vector2d e(0.7, 0.4);
        const double h = 1e-6;
        auto flux = [&](const Eigen::Vector2d& q) -> Eigen::Vector2d { return law.beta(q.squaredNorm()) * q; };
        CHECK(((flux(g + h * e) - flux(g - h * e)) / (2 * h) - T * e).norm() < 1e-8);
        CHECK(T(0, 1) == doctest::Approx(T(1, 0)));
        CHECK(T.trace() == doctest::Approx(2.0 * law.beta(s) + 2.0 * law.dbeta(s) * s));
    }

    TEST_CASE("adjoints")
    {
        const auto m = disk();
        const Problem p = toy_problem(DiffusionLaw::saturating());
        const ScalarField u = solve_state(m, p.f, p.law).u;
        const AdjointSolver adj(u, p.law);

        const int b = m->boundary()[3];
        CHECK(adj.solve_node(b, 2.0).coeffs.cwiseAbs().maxCoeff() == 0.0);
        CHECK(adj.solve_point(m->node(b), 2.0).coeffs.cwiseAbs().maxCoeff() == 0.0);

        int centre = 0;
        for (int i = 1; i < m->num_nodes(); ++i)
            if ((m->node(i) - Point(0.5, 0.5)).norm() < (m->node(centre) - Point(0.5, 0.5)).norm()) centre = i;
        const ScalarField q = adj.solve_node(centre, 1.0);
        CHECK((q.coeffs - adj.solve_point(m->node(centre), 1.0).coeffs).norm() < 1e-12);
        // point load -psi_u delta_y, so a positive psi_u gives a negative adjoint at y
        CHECK(q.coeffs[centre] < 0.0);
        const ScalarField z = adj.solve_node(centre, 0.0);
        CHECK(z.coeffs.cwiseAbs().maxCoeff() == 0.0);
        // linear in psi_u
        CHECK((adj.solve_node(centre, 3.0).coeffs - 3.0 * q.coeffs).norm() < 1e-12 * (1.0 + q.coeffs.norm()));

        const Vector load = point_source_vector(*m, m->node(centre), -1.0);
        const Vector Aq = adj.matrix() * q.coeffs;
        for (int i = 0; i < m->num_nodes(); ++i)
            if (!m->is_dirichlet(i)) CHECK(std::abs(Aq[i] - load[i]) < 1e-10);
    }

    TEST_CASE("integral adjoint")
    {
        const auto m = disk();
        const Problem zero_target = make_problem("manufactured", "zero", "unit");
        const ScalarField u = solve_state(m, zero_target.f, zero_target.law).u;
        const ScalarField p = solve_adjoint_l2(u, zero_target.cost, zero_target.law);
        // u > 0 inside, load -2u phi, maximum principle on a Delaunay mesh
        CHECK(p.coeffs.maxCoeff() <= 1e-14);
        CHECK(p.coeffs.minCoeff() < 0.0);
        for (int i : m->boundary()) CHECK(p.coeffs[i] == 0.0);

        // u equal to the target everywhere gives a zero adjoint
        const Problem zz = make_problem("zero", "zero", "unit");
        const ScalarField u0 = solve_state(m, zz.f, zz.law).u;
        CHECK(solve_adjoint_l2(u0, zz.cost, zz.law).coeffs.cwiseAbs().maxCoeff() == 0.0);
        CHECK(l2_adjoint_load(u0, zz.cost).cwiseAbs().maxCoeff() == 0.0);
    }

    TEST_CASE("integral adjoint vanishes at the optimum as h shrinks")
    {
        const Problem p = toy_problem();
        double prev = 1.0;
        for (int n : {8, 16, 32}) {
            const auto m = square(n);
            const ScalarField u = solve_state(m, p.f, p.law).u;
            const double size = solve_adjoint_l2(u, p.cost, p.law).coeffs.cwiseAbs().maxCoeff();
            CHECK(size < prev / 3.0);
            prev = size;
        }
    }

    TEST_CASE("unknown problem names")
    {
        CHECK_THROWS_AS(make_problem("cubic", "sine", "unit"), ConfigError);
        CHECK_THROWS_AS(make_problem("manufactured", "cosine", "unit"), ConfigError);
        CHECK_THROWS_AS(make_problem("manufactured", "sine", "cubic"), ConfigError);
    }
}
