#pragma once

#include <maxshape/mesh.hpp>

#include <Eigen/Core>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <array>
#include <functional>
#include <memory>
#include <variant>
#include <vector>

namespace maxshape {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Vector = Eigen::VectorXd;
using ScalarFunction = std::function<double(const Point&)>;
using VectorFunction = std::function<Eigen::Vector2d(const Point&)>;

/// P1 field, one coefficient per node.
struct ScalarField {
    MeshPtr mesh;
    Vector coeffs;

    ScalarField() = default;
    ScalarField(MeshPtr m, Vector c);
    static ScalarField zero(MeshPtr m);
    static ScalarField interpolate(MeshPtr m, const ScalarFunction& f);
};

/// P1 vector field with node-major coefficients (x0, y0, x1, y1, ...).
struct VecField {
    MeshPtr mesh;
    Vector coeffs;

    VecField() = default;
    VecField(MeshPtr m, Vector c);
    static VecField zero(MeshPtr m);
    static VecField interpolate(MeshPtr m, const VectorFunction& f);

    Eigen::Vector2d at_node(int i) const { return {coeffs[2 * i], coeffs[2 * i + 1]}; }
};

/// Per-element constant diffusion: a scalar for every element, or a full 2x2
/// tensor per element.
using DiffusionWeight = std::variant<double, std::vector<double>, std::vector<Eigen::Matrix2d>>;

/// Three-point rule through the edge midpoints, exact for quadratics. The
/// weights are |K|/3 each. Points are returned together with the barycentric
/// coordinates of each quadrature point.
struct QuadraturePoint {
    Point x;
    std::array<double, 3> bary;
};
std::array<QuadraturePoint, 3> edge_midpoint_rule(const Mesh& mesh, int k);

/// Symmetric matrix, right-hand side and Dirichlet rows.
struct SparseSymSystem {
    SparseMatrix matrix;
    Vector rhs;
    std::vector<int> constrained;
    Vector constrained_values;
};

/// M_ij = sum_K int_K w grad(phi_i).grad(phi_j) + mass_coeff phi_i phi_j.
SparseMatrix assemble_operator(const Mesh& mesh, const DiffusionWeight& weight, double mass_coeff);

/// b_i = sum_K quadrature(f phi_i) with the edge-midpoint rule.
Vector assemble_load(const Mesh& mesh, const ScalarFunction& f);

/// b_i = scale * phi_i(y).
Vector point_source_vector(const Mesh& mesh, const Point& y, double scale);

double eval_field(const ScalarField& field, const Point& x);
Eigen::Vector2d grad_on_element(const ScalarField& field, int k);

struct SolveOptions {
    double tol = 1e-10;
    /// 0 selects the default cap of 20 sqrt(#free).
    int max_iterations = 0;
};

/// Jacobi-preconditioned conjugate gradients on the free rows after symmetric
/// elimination of the constrained ones.
Vector solve_spd(const SparseSymSystem& system, const SolveOptions& options = {});

/// Sparse Cholesky factorisation of the free block of a symmetric positive
/// definite matrix, reused for many right-hand sides (adjoint bundles, Riesz
/// maps, harmonic extension). Constrained rows always take the supplied
/// values; they default to zero.
class FactoredOperator {
public:
    FactoredOperator(const SparseMatrix& matrix, std::vector<int> constrained);

    Vector solve(const Vector& rhs) const;
    Vector solve(const Vector& rhs, const Vector& constrained_values) const;

    int size() const { return n_; }
    const SparseMatrix& matrix() const { return matrix_; }

private:
    int n_;
    SparseMatrix matrix_;
    std::vector<int> constrained_;
    std::vector<int> free_;
    std::vector<int> free_index_;
    SparseMatrix coupling_; // A_fc
    Eigen::SimplicialLLT<SparseMatrix> llt_;
};

/// Relative residual ||A_ff x_f - b_f|| / ||b_f|| on the free rows.
double free_residual(const SparseSymSystem& system, const Vector& x);

} // namespace maxshape
