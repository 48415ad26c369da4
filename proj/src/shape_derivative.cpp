#include <maxshape/errors.hpp>
#include <maxshape/shape_derivative.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace maxshape {

double DerivativeFunctional::apply(const VecField& X) const
{
    if (X.coeffs.size() != coeffs.size()) throw GeometryError("derivative and field live on different meshes");
    return coeffs.dot(X.coeffs);
}

std::vector<double> nodal_cost(const ScalarField& u, const CostSpec& spec)
{
    const Mesh& mesh = *u.mesh;
    std::vector<double> values(mesh.num_nodes());
    for (int i = 0; i < mesh.num_nodes(); ++i) values[i] = spec.psi(mesh.node(i), u.coeffs[i]);
    return values;
}

MaxCost cost_linfty(const ScalarField& u, const CostSpec& spec)
{
    const auto values = nodal_cost(u, spec);
    MaxCost out;
    out.value = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < static_cast<int>(values.size()); ++i) {
        if (values[i] > out.value) {
            out.value = values[i];
            out.argmax.clear();
        }
        if (values[i] == out.value) out.argmax.push_back(i);
    }
    return out;
}

namespace {
    double interpolate(const ScalarField& u, const Triangle& t, const std::array<double, 3>& bary)
    {
        return bary[0] * u.coeffs[t[0]] + bary[1] * u.coeffs[t[1]] + bary[2] * u.coeffs[t[2]];
    }

    VectorFunction resolve_grad_f(const Problem& problem, double step, const ShapeDerivativeOptions& options)
    {
        if (problem.grad_f) return problem.grad_f;
        if (!options.allow_fd_gradients) throw ConfigError("grad f is required but not provided");
        auto f = problem.f;
        return [f, step](const Point& x) -> Eigen::Vector2d {
            const Eigen::Vector2d ex(step, 0.0), ey(0.0, step);
            return {(f(x + ex) - f(x - ex)) / (2.0 * step), (f(x + ey) - f(x - ey)) / (2.0 * step)};
        };
    }

    PointwiseCostGradient resolve_psi_x(const Problem& problem, double step, const ShapeDerivativeOptions& options)
    {
        if (problem.cost.psi_x) return problem.cost.psi_x;
        if (!options.allow_fd_gradients || !problem.cost.psi)
            throw ConfigError("grad_x Psi is required but not provided");
        auto psi = problem.cost.psi;
        return [psi, step](const Point& x, double z) -> Eigen::Vector2d {
            const Eigen::Vector2d ex(step, 0.0), ey(0.0, step);
            return {(psi(x + ex, z) - psi(x - ex, z)) / (2.0 * step), (psi(x + ey, z) - psi(x - ey, z)) / (2.0 * step)};
        };
    }

    /// Gradient part of S1 (or T1) on an element.
    Eigen::Matrix2d gradient_tensor(const Eigen::Vector2d& gu, const Eigen::Vector2d& gp, const DiffusionLaw& law)
    {
        const double s = gu.squaredNorm();
        const double b = law.beta(s);
        const double dot = gu.dot(gp);
        Eigen::Matrix2d A = b * dot * Eigen::Matrix2d::Identity() - b * (gu * gp.transpose() + gp * gu.transpose());
        if (!law.constant) A -= 2.0 * law.dbeta(s) * dot * gu * gu.transpose();
        return A;
    }

    /// Accumulates int A_K : dv + s div v + w . v over the vector basis, where
    /// A_K is element-constant and s, w are sampled at the edge midpoints.
    template <class Tensor, class Sample>
    Vector assemble_tensor_form(const Mesh& mesh, Tensor&& tensor, Sample&& sample)
    {
        Vector out = Vector::Zero(2 * mesh.num_nodes());
        for (int k = 0; k < mesh.num_triangles(); ++k) {
            const auto& t = mesh.triangle(k);
            const double area = mesh.element_area(k);
            const auto g = mesh.basis_gradients(k);
            const Eigen::Matrix2d A = tensor(k);

            double div_weight = 0.0;
            std::array<Eigen::Vector2d, 3> vec{Eigen::Vector2d::Zero(), Eigen::Vector2d::Zero(), Eigen::Vector2d::Zero()};
            for (const auto& q : edge_midpoint_rule(mesh, k)) {
                const auto [s, w] = sample(k, q);
                div_weight += area / 3.0 * s;
                for (int a = 0; a < 3; ++a) vec[a] += area / 3.0 * q.bary[a] * w;
            }
            for (int a = 0; a < 3; ++a) {
                const Eigen::Vector2d contrib = area * (A * g[a]) + div_weight * g[a] + vec[a];
                out[2 * t[a]] += contrib.x();
                out[2 * t[a] + 1] += contrib.y();
            }
        }
        return out;
    }

    Vector volume_part(const ScalarField& u, const ScalarField& p, const Problem& problem,
                       const ShapeDerivativeOptions& options, bool with_cost)
    {
        const Mesh& mesh = *u.mesh;
        if (p.mesh->num_nodes() != mesh.num_nodes()) throw GeometryError("state and adjoint live on different meshes");
        const double step = mesh.h_max() * mesh.h_max();
        const auto grad_f = resolve_grad_f(problem, step, options);
        PointwiseCostGradient psi_x;
        if (with_cost) psi_x = resolve_psi_x(problem, step, options);

        auto tensor = [&](int k) {
            return gradient_tensor(grad_on_element(u, k), grad_on_element(p, k), problem.law);
        };
        auto sample = [&](int k, const QuadraturePoint& q) -> std::pair<double, Eigen::Vector2d> {
            const auto& t = mesh.triangle(k);
            const double uq = interpolate(u, t, q.bary);
            const double pq = interpolate(p, t, q.bary);
            double s = uq * pq - problem.f(q.x) * pq;
            Eigen::Vector2d w = -grad_f(q.x) * pq;
            if (with_cost) {
                s += problem.cost.psi(q.x, uq);
                w += psi_x(q.x, uq);
            }
            return {s, w};
        };
        return assemble_tensor_form(mesh, tensor, sample);
    }
} // namespace

double cost_l2(const ScalarField& u, const CostSpec& spec)
{
    const Mesh& mesh = *u.mesh;
    double total = 0.0;
    for (int k = 0; k < mesh.num_triangles(); ++k) {
        const auto& t = mesh.triangle(k);
        double s = 0.0;
        for (const auto& q : edge_midpoint_rule(mesh, k)) s += spec.psi(q.x, interpolate(u, t, q.bary));
        total += mesh.element_area(k) / 3.0 * s;
    }
    return total;
}

DerivativeFunctional point_term_functional(const ScalarField& u, int node, const Problem& problem,
                                           const ShapeDerivativeOptions& options)
{
    const Mesh& mesh = *u.mesh;
    const auto psi_x = resolve_psi_x(problem, mesh.h_max() * mesh.h_max(), options);
    DerivativeFunctional out{u.mesh, Vector::Zero(2 * mesh.num_nodes())};
    const Eigen::Vector2d g = psi_x(mesh.node(node), u.coeffs[node]);
    out.coeffs[2 * node] = g.x();
    out.coeffs[2 * node + 1] = g.y();
    return out;
}

DerivativeFunctional assemble_dj(const ScalarField& u, const ScalarField& p, int node, const Problem& problem,
                                 const ShapeDerivativeOptions& options)
{
    if (node < 0 || node >= u.mesh->num_nodes()) throw PointLocationError("node index out of range");
    DerivativeFunctional out = point_term_functional(u, node, problem, options);
    out.coeffs += volume_part(u, p, problem, options, false);
    return out;
}

DerivativeFunctional assemble_dj(const ScalarField& u, const ScalarField& p, const Point& y, const Problem& problem,
                                 const ShapeDerivativeOptions& options)
{
    const Mesh& mesh = *u.mesh;
    const Location loc = mesh.locate_or_throw(y);
    const auto& t = mesh.triangle(loc.triangle);
    const auto psi_x = resolve_psi_x(problem, mesh.h_max() * mesh.h_max(), options);

    DerivativeFunctional out{u.mesh, volume_part(u, p, problem, options, false)};
    const Eigen::Vector2d g = psi_x(y, interpolate(u, t, loc.bary));
    for (int a = 0; a < 3; ++a) {
        out.coeffs[2 * t[a]] += loc.bary[a] * g.x();
        out.coeffs[2 * t[a] + 1] += loc.bary[a] * g.y();
    }
    return out;
}

DerivativeFunctional assemble_dJ2(const ScalarField& u, const ScalarField& p_hat, const Problem& problem,
                                  const ShapeDerivativeOptions& options)
{
    return DerivativeFunctional{u.mesh, volume_part(u, p_hat, problem, options, true)};
}

std::string to_string(MetricKind kind) { return kind == MetricKind::sobolev ? "sobolev" : "euclidean"; }

MetricKind metric_from_string(const std::string& name)
{
    if (name == "sobolev" || name == "h1") return MetricKind::sobolev;
    if (name == "euclidean") return MetricKind::euclidean;
    throw ConfigError("unknown metric '" + name + "'");
}

Metric::Metric(MeshPtr mesh, MetricKind kind) : mesh_(std::move(mesh)), kind_(kind)
{
    if (kind_ == MetricKind::sobolev) {
        scalar_gram_ = assemble_operator(*mesh_, 1.0, 1.0);
        riesz_ = std::make_shared<const FactoredOperator>(scalar_gram_, std::vector<int>{});
    }
}

namespace {
    using Strided = Eigen::Map<const Vector, 0, Eigen::InnerStride<2>>;
    using StridedMut = Eigen::Map<Vector, 0, Eigen::InnerStride<2>>;
} // namespace

VecField Metric::gradient(const DerivativeFunctional& dj) const
{
    const int n = mesh_->num_nodes();
    if (dj.coeffs.size() != 2 * n) throw GeometryError("derivative lives on another mesh");
    if (kind_ == MetricKind::euclidean) return VecField(mesh_, dj.coeffs);

    Vector out(2 * n);
    for (int c = 0; c < 2; ++c) {
        const Vector rhs = Strided(dj.coeffs.data() + c, n);
        StridedMut(out.data() + c, n) = riesz_->solve(rhs);
    }
    return VecField(mesh_, std::move(out));
}

double Metric::inner(const VecField& x, const VecField& y) const
{
    const int n = mesh_->num_nodes();
    if (x.mesh != mesh_ || y.mesh != mesh_) {
        if (x.coeffs.size() != 2 * n || y.coeffs.size() != 2 * n)
            throw GeometryError("inner product of fields on different meshes");
    }
    if (kind_ == MetricKind::euclidean) return x.coeffs.dot(y.coeffs);
    double s = 0.0;
    for (int c = 0; c < 2; ++c) {
        const Vector xc = Strided(x.coeffs.data() + c, n);
        const Vector yc = Strided(y.coeffs.data() + c, n);
        s += xc.dot(scalar_gram_ * yc);
    }
    return s;
}

Vector Metric::apply(const VecField& x) const
{
    const int n = mesh_->num_nodes();
    if (x.coeffs.size() != 2 * n) throw GeometryError("field lives on another mesh");
    if (kind_ == MetricKind::euclidean) return x.coeffs;
    Vector out(2 * n);
    for (int c = 0; c < 2; ++c) {
        const Vector xc = Strided(x.coeffs.data() + c, n);
        StridedMut(out.data() + c, n) = scalar_gram_ * xc;
    }
    return out;
}

double Metric::norm(const VecField& x) const { return std::sqrt(std::max(0.0, inner(x, x))); }

VecField gradient(MetricKind kind, const DerivativeFunctional& dj) { return Metric(dj.mesh, kind).gradient(dj); }

double inner(MetricKind kind, const VecField& x, const VecField& y)
{
    if (x.mesh != y.mesh && x.coeffs.size() != y.coeffs.size())
        throw GeometryError("inner product of fields on different meshes");
    return Metric(x.mesh, kind).inner(x, y);
}

} // namespace maxshape
