#pragma once

#include <maxshape/fem.hpp>

#include <functional>
#include <vector>

namespace maxshape {

using PointwiseCost = std::function<double(const Point&, double)>;
using PointwiseCostGradient = std::function<Eigen::Vector2d(const Point&, double)>;

/// Pointwise cost Psi(x, zeta) with its partial derivatives. psi_x may be left
/// empty, in which case derivative assembly falls back to central differences
/// (or refuses, see ShapeDerivativeOptions).
struct CostSpec {
    PointwiseCost psi;
    PointwiseCost psi_zeta;
    PointwiseCostGradient psi_x;

    /// Psi(x, zeta) = |zeta - u_d(x)|^2. grad_u_d may be empty.
    static CostSpec tracking(ScalarFunction u_d, VectorFunction grad_u_d = {});

    /// Largest mismatch between psi_zeta / psi_x and central differences of
    /// psi at the sample points, relative to 1 + |derivative|.
    double consistency_error(const std::vector<std::pair<Point, double>>& samples, double step = 1e-6) const;
};

} // namespace maxshape
