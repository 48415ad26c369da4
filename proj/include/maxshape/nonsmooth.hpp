#pragma once

#include <maxshape/shape_derivative.hpp>

#include <Eigen/Dense>

#include <vector>

namespace maxshape {

/// Discrete eps-active set. Members are sorted by (gap, node index).
struct ActiveSet {
    std::vector<int> nodes;
    std::vector<double> gaps; ///< J_inf - Psi at each member
    double epsilon = 0.0;     ///< realised threshold
    double j_max = 0.0;
    int argmax_count = 0;     ///< members with gap exactly zero
};

/// Order-statistic rule: with m nodes at gap zero, eps is the (m + n2)-th
/// smallest gap (or the largest one), and every node with gap <= eps joins.
ActiveSet select_active(const std::vector<double>& nodal_values, int n2);
ActiveSet select_active(const ScalarField& u, const CostSpec& spec, int n2);

struct GradientBundle {
    std::vector<int> nodes;
    std::vector<ScalarField> adjoints;
    std::vector<DerivativeFunctional> functionals;
    std::vector<VecField> fields;
    /// true where the node is on the Dirichlet boundary and p = 0 was used
    std::vector<bool> boundary_shortcut;
    Eigen::MatrixXd gram;
    MetricKind metric = MetricKind::sobolev;
    int adjoint_solves = 0;
};

struct BundleOptions {
    int threads = 1;
    ShapeDerivativeOptions derivative;
};

/// Adjoint, derivative and gradient for every active node, then the Gram
/// matrix. Solver failures are rethrown naming the node.
GradientBundle build_bundle(const ScalarField& u, const ActiveSet& active, const Metric& metric,
                            const Problem& problem, const BundleOptions& options = {});

/// Gram matrix of fields in the metric.
Eigen::MatrixXd gram_matrix(const std::vector<VecField>& fields, const Metric& metric);

struct QPOptions {
    /// relative to max(1, max_k Q_kk)
    double kkt_tol = 1e-9;
    /// 0 selects 50 N
    int max_iterations = 0;
};

struct QPResult {
    Eigen::VectorXd weights;
    double value = 0.0; ///< ||sum_k alpha_k X_k||
    double kkt_residual = 0.0;
    int iterations = 0;
};

/// Minimises alpha^T Q alpha over the unit simplex with Wolfe's min-norm-point
/// method on the Gram matrix. Ties go to the lowest index.
QPResult min_norm_point(const Eigen::MatrixXd& Q, const QPOptions& options = {});

/// max_k (Q alpha)_k deficit and complementarity violation, scaled like kkt_tol.
double kkt_residual(const Eigen::MatrixXd& Q, const Eigen::VectorXd& alpha);

struct SteepestDirection {
    bool stationary = false;
    VecField direction; ///< unit length in the metric; empty when stationary
    VecField min_norm;  ///< sum_k alpha_k X_k
    double norm = 0.0;
    double psi = 0.0;   ///< max_k (X_k, g), equals -norm
    QPResult qp;
};

/// Negative normalised min-norm point of the bundle. stat_tol < 0 selects
/// 1e-8 (1 + ||X_1||).
SteepestDirection steepest_direction(const GradientBundle& bundle, const Metric& metric, double stat_tol = -1.0,
                                     const QPOptions& qp = {});

/// max_k (X_k, X) in the metric.
double max_inner(const GradientBundle& bundle, const Metric& metric, const VecField& X);

} // namespace maxshape
