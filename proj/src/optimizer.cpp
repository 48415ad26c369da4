#include <maxshape/errors.hpp>
#include <maxshape/optimizer.hpp>

#include <chrono>
#include <cmath>
#include <memory>
#include <optional>

namespace maxshape {

std::string to_string(StepMode mode) { return mode == StepMode::backtracking ? "backtracking" : "constant"; }
std::string to_string(CostKind kind) { return kind == CostKind::linfty ? "linfty" : "l2"; }
std::string to_string(DeformMode mode) { return mode == DeformMode::harmonic ? "harmonic" : "direct"; }

StepMode step_mode_from_string(const std::string& name)
{
    if (name == "backtracking") return StepMode::backtracking;
    if (name == "constant") return StepMode::constant;
    throw ConfigError("unknown step mode '" + name + "'");
}

CostKind cost_kind_from_string(const std::string& name)
{
    if (name == "linfty") return CostKind::linfty;
    if (name == "l2") return CostKind::l2;
    throw ConfigError("unknown cost '" + name + "'");
}

DeformMode deform_mode_from_string(const std::string& name)
{
    if (name == "harmonic") return DeformMode::harmonic;
    if (name == "direct") return DeformMode::direct;
    throw ConfigError("unknown deformation mode '" + name + "'");
}

Mesh make_initial_mesh(const InitialDomain& domain)
{
    if (domain.shape == "disk") return make_disk_mesh(domain.center, domain.radius, domain.n_boundary, domain.target_h);
    if (domain.shape == "square") return make_square_mesh(domain.square_n);
    throw ConfigError("unknown initial domain '" + domain.shape + "'");
}

void RunConfig::validate() const
{
    if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("gamma must lie in (0, 1]");
    if (t0 < 0.0) throw ConfigError("t0 must be positive (or 0 for the default)");
    if (!(backtrack_factor > 0.0 && backtrack_factor < 1.0)) throw ConfigError("backtrack_factor must lie in (0, 1)");
    if (max_backtracks < 0) throw ConfigError("max_backtracks must be nonnegative");
    if (max_iterations < 0) throw ConfigError("max_iterations must be nonnegative");
    if (n2 < 0) throw ConfigError("n2 must be nonnegative");
    if (threads < 1) throw ConfigError("threads must be at least 1");
    if (snapshot_every < 0) throw ConfigError("snapshot_every must be nonnegative");
    if (!(floors.area_floor >= 0.0) || !(floors.angle_floor >= 0.0)) throw ConfigError("quality floors must be nonnegative");
    if (domain.shape == "disk") {
        if (!(domain.radius > 0.0)) throw ConfigError("disk radius must be positive");
        if (domain.n_boundary < 8) throw ConfigError("n_boundary must be at least 8");
        if (!(domain.target_h > 0.0)) throw ConfigError("target_h must be positive");
    } else if (domain.shape == "square") {
        if (domain.square_n < 2) throw ConfigError("square_n must be at least 2");
    } else {
        throw ConfigError("unknown initial domain '" + domain.shape + "'");
    }
    make_problem(load, target, law);
}

namespace {
    struct Iterate {
        MeshPtr mesh;
        ScalarField u;
        double j_inf = 0.0;
        double j_2 = 0.0;
        std::vector<double> nodal;
    };

    Iterate evaluate(MeshPtr mesh, const Problem& problem)
    {
        Iterate it;
        it.u = solve_state(mesh, problem.f, problem.law).u;
        it.mesh = std::move(mesh);
        it.nodal = nodal_cost(it.u, problem.cost);
        it.j_inf = cost_linfty(it.u, problem.cost).value;
        it.j_2 = cost_l2(it.u, problem.cost);
        return it;
    }

    struct Direction {
        bool stationary = false;
        VecField g;
        double psi = 0.0;
    };

    class Clock {
    public:
        explicit Clock(bool enabled) : enabled_(enabled), start_(std::chrono::steady_clock::now()) {}
        double ms() const
        {
            if (!enabled_) return 0.0;
            return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
        }

    private:
        bool enabled_;
        std::chrono::steady_clock::time_point start_;
    };

    RunResult drive(const RunConfig& config, MeshPtr initial, CostKind kind, const IterateObserver& observer)
    {
        config.validate();
        const Problem problem = make_problem(config.load, config.target, config.law);
        const double t0 = config.t0 > 0.0 ? config.t0 : 0.5 * initial->h_max();
        const Clock clock(config.record_wall_time);
        auto objective = [kind](const Iterate& it) { return kind == CostKind::linfty ? it.j_inf : it.j_2; };

        RunResult result;
        Iterate cur = evaluate(std::move(initial), problem);
        double first_decrease = -1.0;
        std::string pending_stop;

        for (int n = 0;; ++n) {
            IterationRecord row;
            row.iter = n;
            row.j_inf = cur.j_inf;
            row.j_2 = cur.j_2;

            ActiveSet active;
            if (kind == CostKind::linfty) {
                active = select_active(cur.nodal, config.n2);
                row.n_active = static_cast<int>(active.nodes.size());
                row.epsilon = active.epsilon;
            }

            auto finish = [&](const std::string& reason) {
                row.wall_ms = clock.ms();
                if (observer) observer(row, cur.u, kind == CostKind::linfty ? &active : nullptr);
                result.history.rows.push_back(row);
                result.history.termination = reason;
                result.final_mesh = cur.mesh;
                result.final_state = cur.u;
                result.final_active = std::move(active);
                return result;
            };

            if (!pending_stop.empty()) return finish(pending_stop);
            if (n >= config.max_iterations) return finish("max_iterations");

            const Metric metric(cur.mesh, config.metric);
            Direction dir;
            if (kind == CostKind::linfty) {
                BundleOptions bopts;
                bopts.threads = config.threads;
                const GradientBundle bundle = build_bundle(cur.u, active, metric, problem, bopts);
                const SteepestDirection sd = steepest_direction(bundle, metric, config.stat_tol);
                dir.stationary = sd.stationary;
                dir.g = sd.direction;
                dir.psi = sd.psi;
            } else {
                const ScalarField p_hat = solve_adjoint_l2(cur.u, problem.cost, problem.law);
                const VecField grad = metric.gradient(assemble_dJ2(cur.u, p_hat, problem));
                const double norm = metric.norm(grad);
                const double tol = config.stat_tol >= 0.0 ? config.stat_tol : 1e-8 * (1.0 + norm);
                if (norm <= tol) {
                    dir.stationary = true;
                } else {
                    dir.g = VecField(cur.mesh, -grad.coeffs / norm);
                    dir.psi = -norm;
                }
            }
            if (dir.stationary) return finish("stationary");
            row.psi = dir.psi;

            const VecField disp = config.deform == DeformMode::harmonic ? harmonic_extension(dir.g) : dir.g;
            double t = t0;
            std::optional<Iterate> next;
            for (int attempt = 0; attempt <= config.max_backtracks; ++attempt, t *= config.backtrack_factor) {
                DeformResult moved = displace_mesh(*cur.mesh, disp, t, config.floors);
                if (!moved.valid()) continue;
                Iterate cand;
                try {
                    cand = evaluate(std::make_shared<const Mesh>(std::move(*moved.mesh)), problem);
                } catch (const SolverError&) {
                    continue;
                }
                if (config.step_mode == StepMode::constant || objective(cand) < objective(cur)) {
                    next = std::move(cand);
                    break;
                }
            }
            if (!next) return finish("line_search_failed");

            row.step = t;
            row.wall_ms = clock.ms();
            if (observer) observer(row, cur.u, kind == CostKind::linfty ? &active : nullptr);
            result.history.rows.push_back(row);

            const double decrease = objective(cur) - objective(*next);
            if (n == 0) {
                first_decrease = decrease;
            } else if (config.step_mode == StepMode::backtracking && decrease < config.gamma * first_decrease) {
                pending_stop = "insufficient_decrease";
            }
            cur = std::move(*next);
        }
    }
} // namespace

RunResult run_linfty(const RunConfig& config, MeshPtr initial, const IterateObserver& observer)
{
    return drive(config, std::move(initial), CostKind::linfty, observer);
}

RunResult run_l2(const RunConfig& config, MeshPtr initial, const IterateObserver& observer)
{
    return drive(config, std::move(initial), CostKind::l2, observer);
}

RunResult run(const RunConfig& config, CostKind cost, const IterateObserver& observer)
{
    config.validate();
    auto mesh = std::make_shared<const Mesh>(make_initial_mesh(config.domain));
    return drive(config, std::move(mesh), cost, observer);
}

RunResult run_linfty(const RunConfig& config, const IterateObserver& observer)
{
    return run(config, CostKind::linfty, observer);
}

RunResult run_l2(const RunConfig& config, const IterateObserver& observer)
{
    return run(config, CostKind::l2, observer);
}

} // namespace maxshape
