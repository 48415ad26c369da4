#pragma once

#include <maxshape/nonsmooth.hpp>

#include <string>
#include <vector>

namespace maxshape {

enum class TaylorCost { l2, j_at_y };

struct TaylorReport {
    std::vector<double> steps;
    std::vector<double> remainders;
    double derivative = 0.0; ///< dJ(X) from the volume form
    double order = 0.0;      ///< least-squares slope of log r against log t
};

/// Remainders |J(Omega_t) - J(Omega) - t dJ(X)| for t = t0 2^-k, k = 0..n_steps-1,
/// where Omega_t moves every node by t X and the state is re-solved. For
/// j_at_y the tracked point moves with y + t X(y). t0 is halved while the
/// largest deformation is invalid.
TaylorReport taylor_test(const Problem& problem, const MeshPtr& mesh, TaylorCost cost, const VecField& X,
                         const Point& y, double t0, int n_steps);

struct DanskinReport {
    double fd_slope = 0.0;  ///< (J_inf(Omega_t) - J_inf(Omega)) / t
    double predicted = 0.0; ///< max over the argmax nodes of dj(X)
    double discrepancy = 0.0;
    int argmax_count = 0;
};

DanskinReport danskin_check(const Problem& problem, const MeshPtr& mesh, const VecField& X, double t);

/// |G(y1, y2) - G(y2, y1)| for the discrete Green function of -lap + 1 with
/// zero Dirichlet data.
double reciprocity_check(const MeshPtr& mesh, const Point& y1, const Point& y2);
/// G(y1, y2): value at y2 of the unit point-load solution centred at y1.
double green_value(const MeshPtr& mesh, const Point& y1, const Point& y2);

struct ConvergenceReport {
    std::vector<int> levels;
    std::vector<double> h;
    std::vector<double> l2_errors;
    std::vector<double> max_errors;
    double l2_rate = 0.0;
};

/// Square-mesh refinement against sin(pi x) sin(pi y). With load "zero" the
/// reference solution is 0.
ConvergenceReport convergence_study(const std::vector<int>& levels, const std::string& load = "manufactured");

/// L2 norm of u_h - exact with a degree-5 rule.
double l2_error(const ScalarField& u, const ScalarFunction& exact);

/// Least-squares slope of log y against log x.
double fitted_order(const std::vector<double>& x, const std::vector<double>& y);

/// Hausdorff distance between the boundary polygon and the boundary of the
/// axis-aligned rectangle [lo, hi], from vertex and dense edge samples.
double hausdorff_to_rectangle(const Mesh& mesh, const Point& lo, const Point& hi, int samples_per_edge = 16);

struct ReportRow {
    std::string test;
    std::string metric;
    double value = 0.0;
    bool pass = false;
};

/// Runs one suite by name ("convergence", "taylor", "danskin", "reciprocity",
/// "qp" or "all"). Unknown names raise ConfigError.
std::vector<ReportRow> run_verify_suite(const std::string& suite);

} // namespace maxshape
