#include <maxshape/errors.hpp>
#include <maxshape/pde.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace maxshape {

DiffusionLaw DiffusionLaw::unit()
{
    DiffusionLaw law;
    law.name = "unit";
    law.beta = [](double) { return 1.0; };
    law.dbeta = [](double) { return 0.0; };
    law.beta_lo = 1.0;
    law.beta_hi = 1.0;
    law.k_bound = 1.0;
    law.constant = true;
    return law;
}

DiffusionLaw DiffusionLaw::saturating()
{
    DiffusionLaw law;
    law.name = "saturating";
    law.beta = [](double s) { return 1.0 + s / (1.0 + s); };
    law.dbeta = [](double s) { return 1.0 / ((1.0 + s) * (1.0 + s)); };
    law.beta_lo = 1.0;
    law.beta_hi = 2.0;
    law.k_bound = 2.5;
    law.constant = false;
    return law;
}

DiffusionLaw DiffusionLaw::by_name(const std::string& name)
{
    if (name == "unit") return unit();
    if (name == "saturating") return saturating();
    throw ConfigError("unknown diffusion law '" + name + "'");
}

void DiffusionLaw::validate(int samples) const
{
    if (!beta || !dbeta) throw ConfigError("diffusion law '" + name + "' lacks beta or its derivative");
    double prev = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < samples; ++i) {
        // geometric sampling of s in [0, 1e4]
        const double s = i == 0 ? 0.0 : 1e-4 * std::pow(1e8, static_cast<double>(i) / (samples - 1));
        const double b = beta(s);
        const double db = dbeta(s);
        std::ostringstream where;
        where << "diffusion law '" << name << "' at s=" << s << ": ";
        if (!std::isfinite(b) || !std::isfinite(db)) throw ConfigError(where.str() + "non-finite value");
        if (b < beta_lo - 1e-14 || b > beta_hi + 1e-14) throw ConfigError(where.str() + "beta outside its bounds");
        if (b < prev - 1e-14) throw ConfigError(where.str() + "beta is decreasing");
        prev = b;
        // the bracket is extremal for eta parallel or orthogonal to p
        const double parallel = b + 2.0 * db * s;
        const double lo = std::min(b, parallel), hi = std::max(b, parallel);
        if (lo < beta_lo - 1e-14 || hi > k_bound + 1e-14)
            throw ConfigError(where.str() + "ellipticity bracket violated");
    }
}

Eigen::Matrix2d DiffusionLaw::linearized_tensor(const Eigen::Vector2d& grad_u) const
{
    const double s = grad_u.squaredNorm();
    if (constant) return beta(s) * Eigen::Matrix2d::Identity();
    return beta(s) * Eigen::Matrix2d::Identity() + 2.0 * dbeta(s) * grad_u * grad_u.transpose();
}

namespace {
    std::vector<double> element_coefficients(const ScalarField& u, const DiffusionLaw& law)
    {
        std::vector<double> w(u.mesh->num_triangles());
        for (int k = 0; k < u.mesh->num_triangles(); ++k) w[k] = law.beta(grad_on_element(u, k).squaredNorm());
        return w;
    }

    double h1_norm(const SparseMatrix& gram, const Vector& v) { return std::sqrt(std::max(0.0, v.dot(gram * v))); }
} // namespace

StateSolution solve_state(const MeshPtr& mesh, const ScalarFunction& f, const DiffusionLaw& law,
                          const StateOptions& options)
{
    SparseSymSystem system;
    system.rhs = assemble_load(*mesh, f);
    system.constrained = mesh->dirichlet_nodes();
    if (system.constrained.empty()) throw ConfigError("state equation needs a nonempty Dirichlet boundary");

    StateSolution out;
    if (law.constant) {
        system.matrix = assemble_operator(*mesh, law.beta(0.0), 1.0);
        out.u = ScalarField(mesh, solve_spd(system, options.linear));
        out.picard_iterations = 1;
        return out;
    }

    const SparseMatrix gram = assemble_operator(*mesh, 1.0, 1.0);
    SolveOptions inner = options.linear;
    inner.tol = std::min(inner.tol, std::max(1e-14, 1e-2 * options.picard_tol));
    ScalarField u = ScalarField::zero(mesh);
    for (int it = 1; it <= options.max_picard; ++it) {
        system.matrix = assemble_operator(*mesh, element_coefficients(u, law), 1.0);
        Vector next = solve_spd(system, inner);
        const double scale = h1_norm(gram, next);
        const double diff = h1_norm(gram, next - u.coeffs);
        const double increment = scale > 0.0 ? diff / scale : diff;
        out.increments.push_back(increment);
        u.coeffs = std::move(next);
        if (increment <= options.picard_tol) {
            out.u = std::move(u);
            out.picard_iterations = it;
            out.final_increment = increment;
            return out;
        }
    }
    throw SolverError("Picard iteration did not converge in " + std::to_string(options.max_picard) + " steps",
                      out.increments.empty() ? 0.0 : out.increments.back(), out.increments);
}

double state_residual(const ScalarField& u, const ScalarFunction& f, const DiffusionLaw& law)
{
    const Mesh& mesh = *u.mesh;
    SparseSymSystem system;
    system.matrix = law.constant ? assemble_operator(mesh, law.beta(0.0), 1.0)
                                 : assemble_operator(mesh, element_coefficients(u, law), 1.0);
    system.rhs = assemble_load(mesh, f);
    system.constrained = mesh.dirichlet_nodes();
    return free_residual(system, u.coeffs);
}

std::vector<Eigen::Matrix2d> linearized_tensors(const ScalarField& u, const DiffusionLaw& law)
{
    std::vector<Eigen::Matrix2d> t(u.mesh->num_triangles());
    for (int k = 0; k < u.mesh->num_triangles(); ++k) t[k] = law.linearized_tensor(grad_on_element(u, k));
    return t;
}

AdjointSolver::AdjointSolver(const ScalarField& u, const DiffusionLaw& law)
    : mesh_(u.mesh),
      op_(law.constant ? assemble_operator(*u.mesh, law.beta(0.0), 1.0)
                       : assemble_operator(*u.mesh, linearized_tensors(u, law), 1.0),
          u.mesh->dirichlet_nodes())
{
}

ScalarField AdjointSolver::solve_point(const Point& y, double psi_u) const
{
    return solve_load(point_source_vector(*mesh_, y, -psi_u));
}

ScalarField AdjointSolver::solve_node(int node, double psi_u) const
{
    if (node < 0 || node >= mesh_->num_nodes()) throw PointLocationError("node index out of range");
    if (mesh_->is_dirichlet(node) || psi_u == 0.0) return ScalarField::zero(mesh_);
    Vector rhs = Vector::Zero(mesh_->num_nodes());
    rhs[node] = -psi_u;
    return solve_load(rhs);
}

ScalarField AdjointSolver::solve_load(const Vector& rhs) const { return ScalarField(mesh_, op_.solve(rhs)); }

ScalarField solve_adjoint_point(const ScalarField& u, const Point& y, const DiffusionLaw& law, double psi_u)
{
    return AdjointSolver(u, law).solve_point(y, psi_u);
}

Vector l2_adjoint_load(const ScalarField& u, const CostSpec& spec)
{
    const Mesh& mesh = *u.mesh;
    Vector b = Vector::Zero(mesh.num_nodes());
    for (int k = 0; k < mesh.num_triangles(); ++k) {
        const double w = mesh.element_area(k) / 3.0;
        const auto& t = mesh.triangle(k);
        for (const auto& q : edge_midpoint_rule(mesh, k)) {
            const double uq = q.bary[0] * u.coeffs[t[0]] + q.bary[1] * u.coeffs[t[1]] + q.bary[2] * u.coeffs[t[2]];
            const double load = -spec.psi_zeta(q.x, uq);
            for (int i = 0; i < 3; ++i) b[t[i]] += w * load * q.bary[i];
        }
    }
    return b;
}

ScalarField solve_adjoint_l2(const ScalarField& u, const CostSpec& spec, const DiffusionLaw& law)
{
    return AdjointSolver(u, law).solve_load(l2_adjoint_load(u, spec));
}

} // namespace maxshape
