#include <maxshape/errors.hpp>
#include <maxshape/nonsmooth.hpp>

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <optional>
#include <thread>

namespace maxshape {

ActiveSet select_active(const std::vector<double>& nodal_values, int n2)
{
    if (n2 < 0) throw ConfigError("N2 must be nonnegative");
    ActiveSet out;
    if (nodal_values.empty()) return out;

    out.j_max = *std::max_element(nodal_values.begin(), nodal_values.end());
    const int n = static_cast<int>(nodal_values.size());
    std::vector<double> gaps(n);
    for (int i = 0; i < n; ++i) gaps[i] = out.j_max - nodal_values[i];

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return gaps[a] < gaps[b] || (gaps[a] == gaps[b] && a < b); });

    const int m = static_cast<int>(std::count(gaps.begin(), gaps.end(), 0.0));
    const int rank = std::min(n, m + n2);
    out.epsilon = rank > 0 ? gaps[order[rank - 1]] : 0.0;

    for (int i : order) {
        if (gaps[i] > out.epsilon) break;
        out.nodes.push_back(i);
        out.gaps.push_back(gaps[i]);
    }
    out.argmax_count = m;
    return out;
}

ActiveSet select_active(const ScalarField& u, const CostSpec& spec, int n2)
{
    return select_active(nodal_cost(u, spec), n2);
}

Eigen::MatrixXd gram_matrix(const std::vector<VecField>& fields, const Metric& metric)
{
    const int n = static_cast<int>(fields.size());
    Eigen::MatrixXd Q(n, n);
    std::vector<Vector> dual(n);
    for (int l = 0; l < n; ++l) dual[l] = metric.apply(fields[l]);
    for (int k = 0; k < n; ++k) {
        for (int l = k; l < n; ++l) {
            const double v = 0.5 * (fields[k].coeffs.dot(dual[l]) + fields[l].coeffs.dot(dual[k]));
            Q(k, l) = v;
            Q(l, k) = v;
        }
    }
    return Q;
}

GradientBundle build_bundle(const ScalarField& u, const ActiveSet& active, const Metric& metric,
                            const Problem& problem, const BundleOptions& options)
{
    if (active.nodes.empty()) throw ConfigError("empty active set");
    const Mesh& mesh = *u.mesh;
    const int n = static_cast<int>(active.nodes.size());

    GradientBundle b;
    b.nodes = active.nodes;
    b.metric = metric.kind();
    b.adjoints.resize(n);
    b.functionals.resize(n);
    b.fields.resize(n);
    b.boundary_shortcut.assign(n, false);

    std::vector<char> solved(n, 0);
    bool any_interior = false;
    for (int node : active.nodes) any_interior = any_interior || !mesh.is_dirichlet(node);
    std::optional<AdjointSolver> adjoint;
    if (any_interior) adjoint.emplace(u, problem.law);

    auto work = [&](int k) {
        const int node = active.nodes[k];
        try {
            if (mesh.is_dirichlet(node)) {
                b.boundary_shortcut[k] = true;
                b.adjoints[k] = ScalarField::zero(u.mesh);
                b.functionals[k] = point_term_functional(u, node, problem, options.derivative);
            } else {
                const double psi_u = problem.cost.psi_zeta(mesh.node(node), u.coeffs[node]);
                if (psi_u != 0.0) {
                    b.adjoints[k] = adjoint->solve_node(node, psi_u);
                    solved[k] = 1;
                } else {
                    b.adjoints[k] = ScalarField::zero(u.mesh);
                }
                b.functionals[k] = assemble_dj(u, b.adjoints[k], node, problem, options.derivative);
            }
            b.fields[k] = metric.gradient(b.functionals[k]);
        } catch (const SolverError& e) {
            throw SolverError("active node " + std::to_string(node) + ": " + e.what(), e.residual(), e.history());
        }
    };

    const int threads = std::max(1, std::min(options.threads, n));
    if (threads == 1) {
        for (int k = 0; k < n; ++k) work(k);
    } else {
        std::vector<std::exception_ptr> errors(threads);
        std::vector<std::thread> pool;
        for (int w = 0; w < threads; ++w) {
            pool.emplace_back([&, w] {
                try {
                    for (int k = w; k < n; k += threads) work(k);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
        for (auto& t : pool) t.join();
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
    }

    b.adjoint_solves = static_cast<int>(std::count(solved.begin(), solved.end(), 1));
    b.gram = gram_matrix(b.fields, metric);
    return b;
}

namespace {
    double qp_scale(const Eigen::MatrixXd& Q) { return std::max(1.0, Q.diagonal().maxCoeff()); }

    /// Minimiser of mu^T Q_SS mu over the affine hull sum mu = 1.
    Eigen::VectorXd affine_minimizer(const Eigen::MatrixXd& Q, const std::vector<int>& S)
    {
        const int m = static_cast<int>(S.size());
        Eigen::MatrixXd K = Eigen::MatrixXd::Zero(m + 1, m + 1);
        for (int i = 0; i < m; ++i) {
            for (int j = 0; j < m; ++j) K(i, j) = Q(S[i], S[j]);
            K(i, m) = 1.0;
            K(m, i) = 1.0;
        }
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m + 1);
        rhs[m] = 1.0;
        Eigen::VectorXd sol = K.completeOrthogonalDecomposition().solve(rhs);
        Eigen::VectorXd mu = sol.head(m);
        mu /= mu.sum();
        return mu;
    }
} // namespace

double kkt_residual(const Eigen::MatrixXd& Q, const Eigen::VectorXd& alpha)
{
    const Eigen::VectorXd g = Q * alpha;
    const double sq = alpha.dot(g);
    double r = 0.0;
    for (int k = 0; k < alpha.size(); ++k) {
        r = std::max(r, sq - g[k]);
        if (alpha[k] > 0.0) r = std::max(r, std::abs(g[k] - sq));
    }
    r = std::max(r, std::abs(alpha.sum() - 1.0));
    if (alpha.size() > 0) r = std::max(r, -alpha.minCoeff());
    return r / qp_scale(Q);
}

QPResult min_norm_point(const Eigen::MatrixXd& Q, const QPOptions& options)
{
    const int n = static_cast<int>(Q.rows());
    if (n == 0 || Q.cols() != n) throw QPError("Gram matrix must be square and nonempty", 0.0);
    const int cap = options.max_iterations > 0 ? options.max_iterations : 50 * n;
    const double tol = options.kkt_tol * qp_scale(Q);

    int start = 0;
    for (int k = 1; k < n; ++k)
        if (Q(k, k) < Q(start, start)) start = k;
    std::vector<int> S{start};
    Eigen::VectorXd lambda = Eigen::VectorXd::Zero(n);
    lambda[start] = 1.0;

    QPResult out;
    int it = 0;
    for (; it < cap; ++it) {
        // major cycle: most violated vertex
        const Eigen::VectorXd g = Q * lambda;
        const double sq = lambda.dot(g);
        int j = 0;
        for (int k = 1; k < n; ++k)
            if (g[k] < g[j]) j = k;
        if (g[j] >= sq - tol || std::find(S.begin(), S.end(), j) != S.end()) break;
        S.push_back(j);

        // minor cycles
        for (; it < cap; ++it) {
            const Eigen::VectorXd mu = affine_minimizer(Q, S);
            bool interior = true;
            for (int i = 0; i < static_cast<int>(S.size()); ++i) interior = interior && mu[i] > 0.0;
            if (interior) {
                lambda.setZero();
                for (int i = 0; i < static_cast<int>(S.size()); ++i) lambda[S[i]] = mu[i];
                break;
            }
            double theta = 1.0;
            for (int i = 0; i < static_cast<int>(S.size()); ++i) {
                const double li = lambda[S[i]];
                if (mu[i] <= 0.0 && li - mu[i] > 0.0) theta = std::min(theta, li / (li - mu[i]));
            }
            std::vector<int> kept;
            for (int i = 0; i < static_cast<int>(S.size()); ++i) {
                double v = lambda[S[i]] + theta * (mu[i] - lambda[S[i]]);
                if (v <= 1e-15) v = 0.0;
                lambda[S[i]] = v;
                if (v > 0.0) kept.push_back(S[i]);
            }
            S = std::move(kept);
            lambda /= lambda.sum();
        }
    }

    out.weights = lambda;
    out.iterations = it;
    out.value = std::sqrt(std::max(0.0, lambda.dot(Q * lambda)));
    out.kkt_residual = kkt_residual(Q, lambda);
    if (it >= cap) throw QPError("min-norm point iteration cap reached", out.kkt_residual);
    return out;
}

SteepestDirection steepest_direction(const GradientBundle& bundle, const Metric& metric, double stat_tol,
                                     const QPOptions& qp)
{
    if (bundle.fields.empty()) throw ConfigError("empty gradient bundle");
    SteepestDirection out;
    out.qp = min_norm_point(bundle.gram, qp);

    out.min_norm = VecField::zero(metric.mesh());
    for (int k = 0; k < out.qp.weights.size(); ++k)
        if (out.qp.weights[k] != 0.0) out.min_norm.coeffs += out.qp.weights[k] * bundle.fields[k].coeffs;
    out.norm = metric.norm(out.min_norm);

    if (stat_tol < 0.0) stat_tol = 1e-8 * (1.0 + std::sqrt(std::max(0.0, bundle.gram(0, 0))));
    if (out.norm <= stat_tol) {
        out.stationary = true;
        out.psi = 0.0;
        return out;
    }
    out.direction = VecField(metric.mesh(), -out.min_norm.coeffs / out.norm);
    out.psi = -out.norm;
    return out;
}

double max_inner(const GradientBundle& bundle, const Metric& metric, const VecField& X)
{
    const Vector dual = metric.apply(X);
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& f : bundle.fields) best = std::max(best, f.coeffs.dot(dual));
    return best;
}

} // namespace maxshape
