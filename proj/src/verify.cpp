#include <maxshape/deform.hpp>
#include <maxshape/errors.hpp>
#include <maxshape/verify.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace maxshape {

namespace {
    StateOptions tight_state()
    {
        StateOptions opts;
        opts.linear.tol = 1e-13;
        opts.picard_tol = 1e-12;
        opts.max_picard = 200;
        return opts;
    }

    Eigen::Vector2d interpolate_vec(const VecField& X, const Location& loc)
    {
        const auto& t = X.mesh->triangle(loc.triangle);
        Eigen::Vector2d v = Eigen::Vector2d::Zero();
        for (int a = 0; a < 3; ++a) v += loc.bary[a] * X.at_node(t[a]);
        return v;
    }

    double tracked_cost(const Problem& problem, const ScalarField& u, TaylorCost cost, const Point& y)
    {
        if (cost == TaylorCost::l2) return cost_l2(u, problem.cost);
        return problem.cost.psi(y, eval_field(u, y));
    }

    double segment_distance(const Point& p, const Point& a, const Point& b)
    {
        const Eigen::Vector2d d = b - a;
        const double len2 = d.squaredNorm();
        const double s = len2 > 0.0 ? std::clamp((p - a).dot(d) / len2, 0.0, 1.0) : 0.0;
        return (p - (a + s * d)).norm();
    }

    double polyline_distance(const Point& p, const std::vector<Point>& closed)
    {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < closed.size(); ++i)
            best = std::min(best, segment_distance(p, closed[i], closed[(i + 1) % closed.size()]));
        return best;
    }

    std::vector<Point> dense_samples(const std::vector<Point>& closed, int per_edge)
    {
        std::vector<Point> out;
        for (std::size_t i = 0; i < closed.size(); ++i) {
            const Point& a = closed[i];
            const Point& b = closed[(i + 1) % closed.size()];
            for (int s = 0; s < per_edge; ++s) out.push_back(a + (b - a) * (static_cast<double>(s) / per_edge));
        }
        return out;
    }

    // degree-5 seven-point rule, barycentric coordinates and weights
    struct Rule {
        std::array<double, 3> bary;
        double weight;
    };
    const std::array<Rule, 7>& degree5_rule()
    {
        static const std::array<Rule, 7> rule = [] {
            const double a1 = 0.059715871789770, b1 = 0.470142064105115, w1 = 0.132394152788506;
            const double a2 = 0.797426985353087, b2 = 0.101286507323456, w2 = 0.125939180544827;
            return std::array<Rule, 7>{Rule{{1.0 / 3, 1.0 / 3, 1.0 / 3}, 0.225},
                                       Rule{{a1, b1, b1}, w1}, Rule{{b1, a1, b1}, w1}, Rule{{b1, b1, a1}, w1},
                                       Rule{{a2, b2, b2}, w2}, Rule{{b2, a2, b2}, w2}, Rule{{b2, b2, a2}, w2}};
        }();
        return rule;
    }
} // namespace

double fitted_order(const std::vector<double>& x, const std::vector<double>& y)
{
    if (x.size() != y.size() || x.size() < 2) throw ConfigError("order fit needs at least two matching samples");
    const int n = static_cast<int>(x.size());
    double mx = 0.0, my = 0.0;
    for (int i = 0; i < n; ++i) {
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (int i = 0; i < n; ++i) {
        const double dx = std::log(x[i]) - mx;
        sxy += dx * (std::log(y[i]) - my);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

TaylorReport taylor_test(const Problem& problem, const MeshPtr& mesh, TaylorCost cost, const VecField& X,
                         const Point& y, double t0, int n_steps)
{
    if (n_steps < 2) throw ConfigError("Taylor test needs at least two steps");
    if (!(t0 > 0.0)) throw ConfigError("Taylor test needs a positive initial step");

    const StateOptions opts = tight_state();
    const ScalarField u = solve_state(mesh, problem.f, problem.law, opts).u;
    const double j0 = tracked_cost(problem, u, cost, y);

    TaylorReport report;
    Eigen::Vector2d Xy = Eigen::Vector2d::Zero();
    if (cost == TaylorCost::l2) {
        const ScalarField p = solve_adjoint_l2(u, problem.cost, problem.law);
        report.derivative = assemble_dJ2(u, p, problem).apply(X);
    } else {
        Xy = interpolate_vec(X, mesh->locate_or_throw(y));
        const double psi_u = problem.cost.psi_zeta(y, eval_field(u, y));
        const ScalarField p = solve_adjoint_point(u, y, problem.law, psi_u);
        report.derivative = assemble_dj(u, p, y, problem).apply(X);
    }

    while (!displace_mesh(*mesh, X, t0).valid()) {
        t0 *= 0.5;
        if (t0 < 1e-12) throw GeometryError("no valid deformation along the test field");
    }

    double t = t0;
    for (int k = 0; k < n_steps; ++k, t *= 0.5) {
        DeformResult moved = displace_mesh(*mesh, X, t);
        if (!moved.valid()) throw GeometryError("Taylor deformation became invalid");
        auto mt = std::make_shared<const Mesh>(std::move(*moved.mesh));
        const ScalarField ut = solve_state(mt, problem.f, problem.law, opts).u;
        const double jt = tracked_cost(problem, ut, cost, y + t * Xy);
        report.steps.push_back(t);
        report.remainders.push_back(std::abs(jt - j0 - t * report.derivative));
    }

    bool all_zero = true;
    for (double r : report.remainders) all_zero = all_zero && r == 0.0;
    if (all_zero) {
        report.order = std::numeric_limits<double>::infinity();
    } else {
        std::vector<double> ts, rs;
        for (std::size_t i = 0; i < report.steps.size(); ++i) {
            if (report.remainders[i] > 0.0) {
                ts.push_back(report.steps[i]);
                rs.push_back(report.remainders[i]);
            }
        }
        report.order = ts.size() >= 2 ? fitted_order(ts, rs) : 0.0;
    }
    return report;
}

DanskinReport danskin_check(const Problem& problem, const MeshPtr& mesh, const VecField& X, double t)
{
    const StateOptions opts = tight_state();
    const ScalarField u = solve_state(mesh, problem.f, problem.law, opts).u;
    const MaxCost j0 = cost_linfty(u, problem.cost);

    DanskinReport report;
    report.argmax_count = static_cast<int>(j0.argmax.size());
    report.predicted = -std::numeric_limits<double>::infinity();
    const AdjointSolver adjoint(u, problem.law);
    for (int node : j0.argmax) {
        const double psi_u = problem.cost.psi_zeta(mesh->node(node), u.coeffs[node]);
        const ScalarField p = adjoint.solve_node(node, psi_u);
        report.predicted = std::max(report.predicted, assemble_dj(u, p, node, problem).apply(X));
    }

    DeformResult moved = displace_mesh(*mesh, X, t);
    if (!moved.valid()) throw GeometryError("Danskin deformation is invalid");
    auto mt = std::make_shared<const Mesh>(std::move(*moved.mesh));
    const ScalarField ut = solve_state(mt, problem.f, problem.law, opts).u;
    report.fd_slope = (cost_linfty(ut, problem.cost).value - j0.value) / t;
    report.discrepancy = std::abs(report.fd_slope - report.predicted);
    return report;
}

double green_value(const MeshPtr& mesh, const Point& y1, const Point& y2)
{
    const AdjointSolver solver(ScalarField::zero(mesh), DiffusionLaw::unit());
    return eval_field(solver.solve_point(y1, -1.0), y2);
}

double reciprocity_check(const MeshPtr& mesh, const Point& y1, const Point& y2)
{
    const AdjointSolver solver(ScalarField::zero(mesh), DiffusionLaw::unit());
    const double g12 = eval_field(solver.solve_point(y1, -1.0), y2);
    const double g21 = eval_field(solver.solve_point(y2, -1.0), y1);
    return std::abs(g12 - g21);
}

double l2_error(const ScalarField& u, const ScalarFunction& exact)
{
    const Mesh& mesh = *u.mesh;
    double total = 0.0;
    for (int k = 0; k < mesh.num_triangles(); ++k) {
        const auto& t = mesh.triangle(k);
        double s = 0.0;
        for (const auto& q : degree5_rule()) {
            Point x = Point::Zero();
            double uh = 0.0;
            for (int a = 0; a < 3; ++a) {
                x += q.bary[a] * mesh.node(t[a]);
                uh += q.bary[a] * u.coeffs[t[a]];
            }
            const double e = uh - exact(x);
            s += q.weight * e * e;
        }
        total += mesh.element_area(k) * s;
    }
    return std::sqrt(total);
}

ConvergenceReport convergence_study(const std::vector<int>& levels, const std::string& load)
{
    if (levels.size() < 2) throw ConfigError("convergence study needs at least two levels");
    for (std::size_t i = 1; i < levels.size(); ++i)
        if (levels[i] <= levels[i - 1]) throw ConfigError("convergence levels must increase");

    const Problem problem = make_problem(load, "sine", "unit");
    const ScalarFunction exact = load == "zero" ? ScalarFunction([](const Point&) { return 0.0; })
                                                : ScalarFunction(manufactured_solution);
    ConvergenceReport report;
    for (int n : levels) {
        auto mesh = std::make_shared<const Mesh>(make_square_mesh(n));
        const ScalarField u = solve_state(mesh, problem.f, problem.law).u;
        double max_err = 0.0;
        for (int i = 0; i < mesh->num_nodes(); ++i)
            max_err = std::max(max_err, std::abs(u.coeffs[i] - exact(mesh->node(i))));
        report.levels.push_back(n);
        report.h.push_back(mesh->h_max());
        report.l2_errors.push_back(l2_error(u, exact));
        report.max_errors.push_back(max_err);
    }
    bool positive = true;
    for (double e : report.l2_errors) positive = positive && e > 0.0;
    report.l2_rate = positive ? fitted_order(report.h, report.l2_errors) : std::numeric_limits<double>::infinity();
    return report;
}

double hausdorff_to_rectangle(const Mesh& mesh, const Point& lo, const Point& hi, int samples_per_edge)
{
    std::vector<Point> polygon;
    for (int i : mesh.boundary()) polygon.push_back(mesh.node(i));
    const std::vector<Point> rect{lo, Point(hi.x(), lo.y()), hi, Point(lo.x(), hi.y())};

    double d = 0.0;
    for (const Point& p : dense_samples(polygon, samples_per_edge)) d = std::max(d, polyline_distance(p, rect));
    const int rect_samples = std::max(samples_per_edge, static_cast<int>(polygon.size()) * samples_per_edge / 4);
    for (const Point& p : dense_samples(rect, rect_samples)) d = std::max(d, polyline_distance(p, polygon));
    return d;
}

namespace {
    VecField smooth_field(const MeshPtr& mesh, double amplitude, unsigned seed)
    {
        std::mt19937 rng(seed);
        std::uniform_real_distribution<double> coef(-1.0, 1.0);
        const double a = coef(rng), b = coef(rng), c = coef(rng), d = coef(rng), e = coef(rng), f = coef(rng);
        return VecField::interpolate(mesh, [=](const Point& x) -> Eigen::Vector2d {
            return amplitude * Eigen::Vector2d(std::sin(2.0 * a * x.x() + b * x.y() + c),
                                               std::cos(d * x.x() + 2.0 * e * x.y() + f));
        });
    }

    int interior_argmax(const ScalarField& u, const CostSpec& spec)
    {
        const auto values = nodal_cost(u, spec);
        int best = -1;
        for (int i = 0; i < u.mesh->num_nodes(); ++i) {
            if (u.mesh->on_boundary(i)) continue;
            if (best < 0 || values[i] > values[best]) best = i;
        }
        return best;
    }

    void convergence_rows(std::vector<ReportRow>& rows)
    {
        const ConvergenceReport r = convergence_study({8, 16, 32, 64});
        rows.push_back({"convergence", "l2_rate", r.l2_rate, r.l2_rate >= 1.9});
        rows.push_back({"convergence", "l2_error_n64", r.l2_errors.back(), r.l2_errors.back() < r.l2_errors.front()});
    }

    void taylor_rows(std::vector<ReportRow>& rows)
    {
        const Problem problem = toy_problem();
        const std::vector<std::pair<std::string, MeshPtr>> meshes{
            {"square16", std::make_shared<const Mesh>(make_square_mesh(16))},
            {"disk64", std::make_shared<const Mesh>(make_disk_mesh({0.5, 0.5}, 1.0, 64, 0.1))}};
        for (const auto& [name, mesh] : meshes) {
            const VecField X = smooth_field(mesh, 0.1, 11);
            const TaylorReport l2 = taylor_test(problem, mesh, TaylorCost::l2, X, Point::Zero(), 0.25, 7);
            rows.push_back({"taylor_l2_" + name, "order", l2.order, l2.order >= 1.9});

            const ScalarField u = solve_state(mesh, problem.f, problem.law).u;
            const Point y = mesh->node(interior_argmax(u, problem.cost));
            const TaylorReport jy = taylor_test(problem, mesh, TaylorCost::j_at_y, X, y, 0.25, 7);
            rows.push_back({"taylor_point_" + name, "order", jy.order, jy.order >= 1.9});
        }
    }

    void danskin_rows(std::vector<ReportRow>& rows)
    {
        const Problem problem = toy_problem();
        // off-centre so that the symmetry of the target does not tie the maximum
        auto mesh = std::make_shared<const Mesh>(make_disk_mesh({0.4, 0.55}, 1.0, 64, 0.1));
        const VecField X = smooth_field(mesh, 0.1, 5);
        std::vector<double> ts, ds;
        int argmax = 0;
        for (double t = 1e-2; ts.size() < 4; t *= 0.5) {
            const DanskinReport r = danskin_check(problem, mesh, X, t);
            argmax = r.argmax_count;
            ts.push_back(t);
            ds.push_back(r.discrepancy);
        }
        bool positive = true;
        for (double d : ds) positive = positive && d > 0.0;
        const double order = positive ? fitted_order(ts, ds) : 0.0;
        rows.push_back({"danskin", "argmax_count", static_cast<double>(argmax), argmax == 1});
        rows.push_back({"danskin", "discrepancy_order", order, std::abs(order - 1.0) <= 0.1});
        rows.push_back({"danskin", "discrepancy_smallest_t", ds.back(), ds.back() < ds.front()});
    }

    void reciprocity_rows(std::vector<ReportRow>& rows)
    {
        auto mesh = std::make_shared<const Mesh>(make_disk_mesh({0.5, 0.5}, 1.0, 64, 0.1));
        std::mt19937 rng(7);
        std::uniform_real_distribution<double> radius(0.0, 0.9), angle(0.0, 2.0 * std::numbers::pi);
        double worst = 0.0;
        for (int i = 0; i < 10; ++i) {
            auto sample = [&] {
                const double r = radius(rng), a = angle(rng);
                return Point(0.5 + r * std::cos(a), 0.5 + r * std::sin(a));
            };
            const Point y1 = sample(), y2 = sample();
            worst = std::max(worst, reciprocity_check(mesh, y1, y2));
        }
        rows.push_back({"reciprocity", "max_discrepancy", worst, worst <= 1e-9});
    }
} // namespace

std::vector<ReportRow> run_verify_suite(const std::string& suite)
{
    std::vector<ReportRow> rows;
    const bool all = suite == "all";
    bool known = all;
    if (all || suite == "convergence") {
        convergence_rows(rows);
        known = true;
    }
    if (all || suite == "taylor") {
        taylor_rows(rows);
        known = true;
    }
    if (all || suite == "danskin") {
        danskin_rows(rows);
        known = true;
    }
    if (all || suite == "reciprocity") {
        reciprocity_rows(rows);
        known = true;
    }
    if (!known) throw ConfigError("unknown verify suite '" + suite + "'");
    return rows;
}

} // namespace maxshape
