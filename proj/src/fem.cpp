#include <maxshape/errors.hpp>
#include <maxshape/fem.hpp>

#include <Eigen/IterativeLinearSolvers>

#include <cmath>
#include <string>

namespace maxshape {

ScalarField::ScalarField(MeshPtr m, Vector c) : mesh(std::move(m)), coeffs(std::move(c))
{
    if (coeffs.size() != mesh->num_nodes()) throw GeometryError("scalar field size differs from node count");
}

ScalarField ScalarField::zero(MeshPtr m)
{
    const auto n = m->num_nodes();
    return ScalarField(std::move(m), Vector::Zero(n));
}

ScalarField ScalarField::interpolate(MeshPtr m, const ScalarFunction& f)
{
    Vector c(m->num_nodes());
    for (int i = 0; i < m->num_nodes(); ++i) c[i] = f(m->node(i));
    return ScalarField(std::move(m), std::move(c));
}

VecField::VecField(MeshPtr m, Vector c) : mesh(std::move(m)), coeffs(std::move(c))
{
    if (coeffs.size() != 2 * mesh->num_nodes()) throw GeometryError("vector field size differs from 2 x node count");
}

VecField VecField::zero(MeshPtr m)
{
    const auto n = m->num_nodes();
    return VecField(std::move(m), Vector::Zero(2 * n));
}

VecField VecField::interpolate(MeshPtr m, const VectorFunction& f)
{
    Vector c(2 * m->num_nodes());
    for (int i = 0; i < m->num_nodes(); ++i) {
        const Eigen::Vector2d v = f(m->node(i));
        c[2 * i] = v.x();
        c[2 * i + 1] = v.y();
    }
    return VecField(std::move(m), std::move(c));
}

std::array<QuadraturePoint, 3> edge_midpoint_rule(const Mesh& mesh, int k)
{
    const auto& t = mesh.triangle(k);
    const Point &a = mesh.node(t[0]), &b = mesh.node(t[1]), &c = mesh.node(t[2]);
    return {QuadraturePoint{0.5 * (b + c), {0.0, 0.5, 0.5}}, QuadraturePoint{0.5 * (a + c), {0.5, 0.0, 0.5}},
            QuadraturePoint{0.5 * (a + b), {0.5, 0.5, 0.0}}};
}

SparseMatrix assemble_operator(const Mesh& mesh, const DiffusionWeight& weight, double mass_coeff)
{
    if (!std::isfinite(mass_coeff) || mass_coeff < 0.0) throw GeometryError("mass coefficient must be finite and >= 0");
    const int nt = mesh.num_triangles();
    if (const auto* w = std::get_if<std::vector<double>>(&weight); w && static_cast<int>(w->size()) != nt)
        throw GeometryError("per-element weight count differs from triangle count");
    if (const auto* w = std::get_if<std::vector<Eigen::Matrix2d>>(&weight); w && static_cast<int>(w->size()) != nt)
        throw GeometryError("per-element tensor count differs from triangle count");

    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(9 * nt);
    for (int k = 0; k < nt; ++k) {
        const double area = mesh.element_area(k);
        if (!(area > 0.0)) throw GeometryError("degenerate element " + std::to_string(k));
        Eigen::Matrix2d W = Eigen::Matrix2d::Identity();
        if (const auto* s = std::get_if<double>(&weight)) {
            W *= *s;
        } else if (const auto* v = std::get_if<std::vector<double>>(&weight)) {
            W *= (*v)[k];
        } else {
            W = std::get<std::vector<Eigen::Matrix2d>>(weight)[k];
        }
        if (!W.allFinite()) throw GeometryError("non-finite diffusion weight on element " + std::to_string(k));

        const auto g = mesh.basis_gradients(k);
        const auto& t = mesh.triangle(k);
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                const double stiff = area * g[i].dot(W * g[j]);
                const double mass = mass_coeff * area / 12.0 * (i == j ? 2.0 : 1.0);
                trips.emplace_back(t[i], t[j], stiff + mass);
            }
        }
    }
    SparseMatrix A(mesh.num_nodes(), mesh.num_nodes());
    A.setFromTriplets(trips.begin(), trips.end());
    return A;
}

Vector assemble_load(const Mesh& mesh, const ScalarFunction& f)
{
    Vector b = Vector::Zero(mesh.num_nodes());
    for (int k = 0; k < mesh.num_triangles(); ++k) {
        const double w = mesh.element_area(k) / 3.0;
        const auto& t = mesh.triangle(k);
        for (const auto& q : edge_midpoint_rule(mesh, k)) {
            const double fx = f(q.x);
            if (!std::isfinite(fx)) throw GeometryError("non-finite load value");
            for (int i = 0; i < 3; ++i) b[t[i]] += w * fx * q.bary[i];
        }
    }
    return b;
}

Vector point_source_vector(const Mesh& mesh, const Point& y, double scale)
{
    const Location loc = mesh.locate_or_throw(y);
    Vector b = Vector::Zero(mesh.num_nodes());
    const auto& t = mesh.triangle(loc.triangle);
    for (int i = 0; i < 3; ++i) b[t[i]] += scale * loc.bary[i];
    return b;
}

double eval_field(const ScalarField& field, const Point& x)
{
    const Location loc = field.mesh->locate_or_throw(x);
    const auto& t = field.mesh->triangle(loc.triangle);
    return loc.bary[0] * field.coeffs[t[0]] + loc.bary[1] * field.coeffs[t[1]] + loc.bary[2] * field.coeffs[t[2]];
}

Eigen::Vector2d grad_on_element(const ScalarField& field, int k)
{
    const auto g = field.mesh->basis_gradients(k);
    const auto& t = field.mesh->triangle(k);
    return field.coeffs[t[0]] * g[0] + field.coeffs[t[1]] * g[1] + field.coeffs[t[2]] * g[2];
}

namespace {
    struct Partition {
        std::vector<int> free;
        std::vector<int> free_index; // -1 for constrained
    };

    Partition partition(int n, const std::vector<int>& constrained)
    {
        Partition p;
        p.free_index.assign(n, 0);
        for (int c : constrained) {
            if (c < 0 || c >= n) throw SolverError("constrained index out of range", 0.0);
            p.free_index[c] = -1;
        }
        for (int i = 0; i < n; ++i) {
            if (p.free_index[i] == 0) {
                p.free_index[i] = static_cast<int>(p.free.size());
                p.free.push_back(i);
            }
        }
        return p;
    }

    /// Splits A into the free block A_ff and the coupling block A_fc (columns
    /// indexed by position in `constrained`).
    void split_blocks(const SparseMatrix& A, const Partition& p, const std::vector<int>& constrained,
                      SparseMatrix& A_ff, SparseMatrix& A_fc)
    {
        std::vector<int> constrained_pos(A.rows(), -1);
        for (int j = 0; j < static_cast<int>(constrained.size()); ++j) constrained_pos[constrained[j]] = j;

        std::vector<Eigen::Triplet<double>> ff, fc;
        for (int col = 0; col < A.outerSize(); ++col) {
            for (SparseMatrix::InnerIterator it(A, col); it; ++it) {
                const int r = p.free_index[it.row()];
                if (r < 0) continue;
                const int c = p.free_index[it.col()];
                if (c >= 0) {
                    ff.emplace_back(r, c, it.value());
                } else {
                    fc.emplace_back(r, constrained_pos[it.col()], it.value());
                }
            }
        }
        const auto nf = static_cast<Eigen::Index>(p.free.size());
        A_ff.resize(nf, nf);
        A_ff.setFromTriplets(ff.begin(), ff.end());
        A_fc.resize(nf, static_cast<Eigen::Index>(constrained.size()));
        A_fc.setFromTriplets(fc.begin(), fc.end());
    }

    Vector constrained_vector(const std::vector<int>& constrained, const Vector& values)
    {
        if (values.size() == 0) return Vector::Zero(static_cast<Eigen::Index>(constrained.size()));
        if (values.size() != static_cast<Eigen::Index>(constrained.size()))
            throw SolverError("constrained value count differs from constrained node count", 0.0);
        return values;
    }
} // namespace

Vector solve_spd(const SparseSymSystem& system, const SolveOptions& options)
{
    const int n = static_cast<int>(system.matrix.rows());
    if (system.matrix.cols() != n || system.rhs.size() != n) throw SolverError("system dimensions disagree", 0.0);
    const Partition p = partition(n, system.constrained);
    const Vector xc = constrained_vector(system.constrained, system.constrained_values);

    Vector x = Vector::Zero(n);
    for (std::size_t j = 0; j < system.constrained.size(); ++j) x[system.constrained[j]] = xc[j];
    if (p.free.empty()) return x;

    SparseMatrix A_ff, A_fc;
    split_blocks(system.matrix, p, system.constrained, A_ff, A_fc);
    Vector b(p.free.size());
    for (std::size_t i = 0; i < p.free.size(); ++i) b[i] = system.rhs[p.free[i]];
    if (xc.size() > 0) b -= A_fc * xc;
    if (b.norm() == 0.0) return x;

    const int cap = options.max_iterations > 0
        ? options.max_iterations
        : static_cast<int>(std::ceil(20.0 * std::sqrt(static_cast<double>(p.free.size()))));
    Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper, Eigen::DiagonalPreconditioner<double>> cg;
    cg.setTolerance(options.tol);
    cg.setMaxIterations(cap);
    cg.compute(A_ff);
    Vector xf = cg.solve(b);
    if (cg.info() != Eigen::Success) {
        throw SolverError("conjugate gradients did not converge in " + std::to_string(cap)
                              + " iterations (relative residual " + std::to_string(cg.error()) + ")",
                          cg.error());
    }
    for (std::size_t i = 0; i < p.free.size(); ++i) x[p.free[i]] = xf[i];
    return x;
}

double free_residual(const SparseSymSystem& system, const Vector& x)
{
    const Partition p = partition(static_cast<int>(system.matrix.rows()), system.constrained);
    const Vector r = system.rhs - system.matrix * x;
    double rn = 0.0, bn = 0.0;
    for (int i : p.free) {
        rn += r[i] * r[i];
        bn += system.rhs[i] * system.rhs[i];
    }
    if (bn == 0.0) return std::sqrt(rn);
    return std::sqrt(rn / bn);
}

FactoredOperator::FactoredOperator(const SparseMatrix& matrix, std::vector<int> constrained)
    : n_(static_cast<int>(matrix.rows())), matrix_(matrix), constrained_(std::move(constrained))
{
    const Partition p = partition(n_, constrained_);
    free_ = p.free;
    free_index_ = p.free_index;
    SparseMatrix A_ff;
    split_blocks(matrix_, p, constrained_, A_ff, coupling_);
    if (!free_.empty()) {
        llt_.compute(A_ff);
        if (llt_.info() != Eigen::Success) throw SolverError("Cholesky factorisation failed: matrix is not SPD", 0.0);
    }
}

Vector FactoredOperator::solve(const Vector& rhs) const { return solve(rhs, Vector()); }

Vector FactoredOperator::solve(const Vector& rhs, const Vector& constrained_values) const
{
    if (rhs.size() != n_) throw SolverError("right-hand side size mismatch", 0.0);
    const Vector xc = constrained_vector(constrained_, constrained_values);
    Vector x = Vector::Zero(n_);
    for (std::size_t j = 0; j < constrained_.size(); ++j) x[constrained_[j]] = xc[j];
    if (free_.empty()) return x;

    Vector b(free_.size());
    for (std::size_t i = 0; i < free_.size(); ++i) b[i] = rhs[free_[i]];
    if (xc.size() > 0) b -= coupling_ * xc;
    const Vector xf = llt_.solve(b);
    for (std::size_t i = 0; i < free_.size(); ++i) x[free_[i]] = xf[i];
    return x;
}

} // namespace maxshape
