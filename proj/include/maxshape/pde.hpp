#pragma once

#include <maxshape/cost.hpp>
#include <maxshape/fem.hpp>

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace maxshape {

/// Diffusion coefficient beta(|grad u|^2) of the quasi-linear state equation
///   -div(beta(|grad u|^2) grad u) + u = f.
struct DiffusionLaw {
    std::string name;
    std::function<double(double)> beta;
    std::function<double(double)> dbeta;
    double beta_lo = 1.0;
    double beta_hi = 1.0;
    /// upper bound K of beta(|p|^2)|eta|^2 + 2 beta'(|p|^2)|p.eta|^2 <= K|eta|^2
    double k_bound = 1.0;
    bool constant = true;

    static DiffusionLaw unit();
    /// beta(s) = 1 + s / (1 + s); bounds 1 <= beta <= 2, K = 2.5.
    static DiffusionLaw saturating();
    static DiffusionLaw by_name(const std::string& name);

    /// Samples bounds, monotonicity and the ellipticity bracket; throws
    /// ConfigError with the first violation.
    void validate(int samples = 200) const;

    /// beta I + 2 beta' p (x) p, the gradient block of the linearised operator.
    Eigen::Matrix2d linearized_tensor(const Eigen::Vector2d& grad_u) const;
};

struct StateOptions {
    SolveOptions linear{1e-10, 0};
    /// relative H1 increment at which Picard iteration stops
    double picard_tol = 1e-10;
    int max_picard = 100;
};

struct StateSolution {
    ScalarField u;
    int picard_iterations = 0;
    double final_increment = 0.0;
    std::vector<double> increments;
};

/// Dirichlet data is zero on every Dirichlet-marked node.
StateSolution solve_state(const MeshPtr& mesh, const ScalarFunction& f, const DiffusionLaw& law,
                          const StateOptions& options = {});

/// Galerkin residual of a state against every free basis function, relative
/// to the load norm.
double state_residual(const ScalarField& u, const ScalarFunction& f, const DiffusionLaw& law);

/// Per-element tensors beta I + 2 beta' grad u (x) grad u.
std::vector<Eigen::Matrix2d> linearized_tensors(const ScalarField& u, const DiffusionLaw& law);

/// Factorised linearised operator around a state; solves any number of
/// adjoint problems with zero Dirichlet data.
class AdjointSolver {
public:
    AdjointSolver(const ScalarField& u, const DiffusionLaw& law);

    /// Adjoint with point load -psi_u delta_y.
    ScalarField solve_point(const Point& y, double psi_u) const;
    /// Adjoint with point load at node y; Dirichlet nodes return zero without a solve.
    ScalarField solve_node(int node, double psi_u) const;
    ScalarField solve_load(const Vector& rhs) const;

    const SparseMatrix& matrix() const { return op_.matrix(); }
    const MeshPtr& mesh() const { return mesh_; }

private:
    MeshPtr mesh_;
    FactoredOperator op_;
};

ScalarField solve_adjoint_point(const ScalarField& u, const Point& y, const DiffusionLaw& law, double psi_u);

/// Adjoint of the integral cost int Psi(x, u) dx: load -int psi_zeta(x, u_h) phi.
ScalarField solve_adjoint_l2(const ScalarField& u, const CostSpec& spec, const DiffusionLaw& law);

/// Right-hand side of solve_adjoint_l2.
Vector l2_adjoint_load(const ScalarField& u, const CostSpec& spec);

} // namespace maxshape
