#pragma once

#include <maxshape/fem.hpp>
#include <maxshape/problem.hpp>

#include <memory>
#include <string>
#include <vector>

namespace maxshape {

/// Values of a shape derivative on the vector basis v^k = phi_i e_c, ordered
/// node-major like VecField. Applying it to a field X = sum_k X_k v^k gives
/// sum_k X_k coeffs_k.
struct DerivativeFunctional {
    MeshPtr mesh;
    Vector coeffs;

    double apply(const VecField& X) const;
};

struct MaxCost {
    double value = 0.0;
    std::vector<int> argmax; ///< every node attaining the maximum exactly
};

/// Psi(x_i, u_i) at every node.
std::vector<double> nodal_cost(const ScalarField& u, const CostSpec& spec);

/// max over mesh nodes of Psi(x_i, u_i).
MaxCost cost_linfty(const ScalarField& u, const CostSpec& spec);

/// int Psi(x, u_h) dx with the edge-midpoint rule.
double cost_l2(const ScalarField& u, const CostSpec& spec);

struct ShapeDerivativeOptions {
    /// Central differences with step h_max^2 stand in for missing grad f and
    /// psi_x when true; otherwise their absence raises ConfigError.
    bool allow_fd_gradients = true;
};

/// Volume form of dj(Omega^y) for j = Psi(y, u(y)):
///   int S1 : dX + S0 . X dx + X(y) . grad_y Psi(y, u(y))
/// with
///   S1 = (beta grad u.grad p + u p - f p) I - beta (grad u (x) grad p + grad p (x) grad u)
///        - 2 beta' (grad u.grad p) grad u (x) grad u,
///   S0 = -grad f p.
/// Gradient terms are element-constant; every other term uses the same
/// edge-midpoint rule as the load, so the result is the exact derivative of
/// the discrete functional under node motion.
DerivativeFunctional assemble_dj(const ScalarField& u, const ScalarField& p, const Point& y, const Problem& problem,
                                 const ShapeDerivativeOptions& options = {});
DerivativeFunctional assemble_dj(const ScalarField& u, const ScalarField& p, int node, const Problem& problem,
                                 const ShapeDerivativeOptions& options = {});

/// X(y) . grad_y Psi(y, u(y)) alone; equals assemble_dj when p vanishes.
DerivativeFunctional point_term_functional(const ScalarField& u, int node, const Problem& problem,
                                           const ShapeDerivativeOptions& options = {});

/// Volume form of dJ2 for J2 = int Psi(x, u) dx:
///   T1 = (Psi + beta grad u.grad p - f p + u p) I - beta (grad u (x) grad p + grad p (x) grad u)
///        - 2 beta' (grad u.grad p) grad u (x) grad u,
///   T0 = -grad f p + grad_x Psi.
DerivativeFunctional assemble_dJ2(const ScalarField& u, const ScalarField& p_hat, const Problem& problem,
                                  const ShapeDerivativeOptions& options = {});

enum class MetricKind { sobolev, euclidean };

std::string to_string(MetricKind kind);
MetricKind metric_from_string(const std::string& name);

/// Inner product on P1 x P1 fields and the matching Riesz map. The Sobolev
/// metric is int dX : dY + X . Y dx with free boundary values; the Euclidean
/// one is the coefficient dot product in the nodal basis.
class Metric {
public:
    Metric(MeshPtr mesh, MetricKind kind);

    VecField gradient(const DerivativeFunctional& dj) const;
    double inner(const VecField& x, const VecField& y) const;
    double norm(const VecField& x) const;
    /// Coefficients of the functional Y -> (x, Y).
    Vector apply(const VecField& x) const;

    MetricKind kind() const { return kind_; }
    const MeshPtr& mesh() const { return mesh_; }

private:
    MeshPtr mesh_;
    MetricKind kind_;
    SparseMatrix scalar_gram_;
    std::shared_ptr<const FactoredOperator> riesz_;
};

VecField gradient(MetricKind kind, const DerivativeFunctional& dj);
double inner(MetricKind kind, const VecField& x, const VecField& y);

} // namespace maxshape
