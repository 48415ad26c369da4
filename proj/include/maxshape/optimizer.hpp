#pragma once

#include <maxshape/deform.hpp>
#include <maxshape/nonsmooth.hpp>

#include <functional>
#include <string>
#include <vector>

namespace maxshape {

enum class StepMode { backtracking, constant };
enum class CostKind { linfty, l2 };

std::string to_string(StepMode mode);
std::string to_string(CostKind kind);
std::string to_string(DeformMode mode);
StepMode step_mode_from_string(const std::string& name);
CostKind cost_kind_from_string(const std::string& name);
DeformMode deform_mode_from_string(const std::string& name);

struct InitialDomain {
    std::string shape = "disk"; ///< "disk" or "square"
    Point center{0.5, 0.5};
    double radius = 2.449489742783178; // sqrt(6)
    int n_boundary = 400;
    double target_h = 0.065;
    int square_n = 16;

    bool operator==(const InitialDomain&) const = default;
};

Mesh make_initial_mesh(const InitialDomain& domain);

struct RunConfig {
    std::string load = "manufactured";
    std::string target = "sine";
    std::string law = "unit";
    InitialDomain domain;

    MetricKind metric = MetricKind::sobolev;
    DeformMode deform = DeformMode::harmonic;
    StepMode step_mode = StepMode::backtracking;
    int n2 = 40;
    double gamma = 1e-6;
    /// 0 selects 0.5 h_max of the initial mesh
    double t0 = 0.0;
    double backtrack_factor = 0.5;
    int max_backtracks = 30;
    int max_iterations = 2000;
    /// negative selects 1e-8 (1 + ||X_1||)
    double stat_tol = -1.0;
    QualityFloors floors;
    int threads = 1;

    int snapshot_every = 0; ///< 0 disables shape snapshots
    std::string output_dir = "out";
    bool record_wall_time = true;

    bool operator==(const RunConfig&) const = default;

    /// Throws ConfigError on the first invalid field.
    void validate() const;
};

struct IterationRecord {
    int iter = 0;
    double j_inf = 0.0;
    double j_2 = 0.0;
    int n_active = 0;
    double epsilon = 0.0;
    double step = 0.0; ///< accepted t leaving this iterate; 0 on the last row
    double psi = 0.0;
    double wall_ms = 0.0;

    bool operator==(const IterationRecord&) const = default;
};

struct RunHistory {
    std::vector<IterationRecord> rows;
    std::string termination; ///< max_iterations, stationary, insufficient_decrease, line_search_failed
};

struct RunResult {
    RunHistory history;
    MeshPtr final_mesh;
    ScalarField final_state;
    ActiveSet final_active; ///< empty for the L2 path
};

/// Called once per recorded iterate with its state, before the step leaving
/// it. The active set is null on the L2 path.
using IterateObserver = std::function<void(const IterationRecord&, const ScalarField&, const ActiveSet*)>;

RunResult run_linfty(const RunConfig& config, const IterateObserver& observer = {});
RunResult run_l2(const RunConfig& config, const IterateObserver& observer = {});
RunResult run(const RunConfig& config, CostKind cost, const IterateObserver& observer = {});

/// Same loops started from a given mesh.
RunResult run_linfty(const RunConfig& config, MeshPtr initial, const IterateObserver& observer = {});
RunResult run_l2(const RunConfig& config, MeshPtr initial, const IterateObserver& observer = {});

} // namespace maxshape
