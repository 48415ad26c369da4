#include <maxshape/cost.hpp>

#include <algorithm>
#include <cmath>

namespace maxshape {

CostSpec CostSpec::tracking(ScalarFunction u_d, VectorFunction grad_u_d)
{
    CostSpec spec;
    spec.psi = [u_d](const Point& x, double z) {
        const double d = z - u_d(x);
        return d * d;
    };
    spec.psi_zeta = [u_d](const Point& x, double z) { return 2.0 * (z - u_d(x)); };
    if (grad_u_d) {
        spec.psi_x = [u_d, grad_u_d](const Point& x, double z) -> Eigen::Vector2d {
            return -2.0 * (z - u_d(x)) * grad_u_d(x);
        };
    }
    return spec;
}

double CostSpec::consistency_error(const std::vector<std::pair<Point, double>>& samples, double step) const
{
    double worst = 0.0;
    for (const auto& [x, z] : samples) {
        const double dz = (psi(x, z + step) - psi(x, z - step)) / (2.0 * step);
        const double pz = psi_zeta(x, z);
        worst = std::max(worst, std::abs(dz - pz) / (1.0 + std::abs(pz)));
        if (psi_x) {
            const Eigen::Vector2d px = psi_x(x, z);
            for (int c = 0; c < 2; ++c) {
                Point xp = x, xm = x;
                xp[c] += step;
                xm[c] -= step;
                const double dx = (psi(xp, z) - psi(xm, z)) / (2.0 * step);
                worst = std::max(worst, std::abs(dx - px[c]) / (1.0 + std::abs(px[c])));
            }
        }
    }
    return worst;
}

} // namespace maxshape
