#ifndef NEL_TESTS_HELPERS_HPP
#define NEL_TESTS_HELPERS_HPP

#include <Eigen/Dense>
#include <cmath>
#include <functional>

#include "nel/rng.hpp"

namespace nel::testing {

inline Eigen::VectorXd random_vector(Rng& rng, int size, double scale = 1.0) {
    Eigen::VectorXd v(size);
    for (int k = 0; k < size; ++k) v(k) = scale * rng.normal();
    return v;
}

/// Root of a monotone scalar derivative on [0, 1] by sign bisection.
inline double bisect_derivative(const std::function<double(double)>& dphi) {
    if (dphi(0.0) >= 0.0) return 0.0;  // convex with nonnegative slope at 0
    double lo = 0.0, hi = 1.0;
    for (int k = 0; k < 200; ++k) {
        const double mid = 0.5 * (lo + hi);
        if (dphi(mid) < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

/// Minimizer of eta ||c1 - c2|| + v1'(l1-c1) + v2'(l2-c2)
/// + rho/2 (||l1-c1||^2 + ||l2-c2||^2), found without the closed form:
/// the midpoint reduction is exact calculus, the difference direction is a
/// scalar line whose derivative is bisected to machine precision.
inline std::pair<Eigen::VectorXd, Eigen::VectorXd> edge_prox_oracle(
    const Eigen::VectorXd& l1, const Eigen::VectorXd& l2, const Eigen::VectorXd& v1,
    const Eigen::VectorXd& v2, double rho, double eta) {
    const Eigen::VectorXd a = l1 + v1 / rho;
    const Eigen::VectorXd b = l2 + v2 / rho;
    const Eigen::VectorXd u = a - b;
    const double unorm = u.norm();
    const Eigen::VectorXd mid = 0.5 * (a + b);
    if (unorm == 0.0) return {mid, mid};
    // phi(t) = eta t ||u|| + (rho/4) ||u||^2 (1-t)^2 on [0, 1]
    const auto dphi = [&](double t) {
        return eta * unorm - 0.5 * rho * unorm * unorm * (1.0 - t);
    };
    const double t = bisect_derivative(dphi);
    const Eigen::VectorXd s = t * u;
    return {mid + 0.5 * s, mid - 0.5 * s};
}

/// Minimizer of eta ||z|| + rho/2 ||h - z||^2, same derivative-bisection
/// scheme on the scalar line through h.
inline Eigen::VectorXd group_prox_oracle(const Eigen::VectorXd& h, double rho, double eta) {
    const double hnorm = h.norm();
    if (hnorm == 0.0) return Eigen::VectorXd::Zero(h.size());
    // phi(t) = eta t ||h|| + (rho/2) ||h||^2 (1-t)^2 on [0, 1]
    const auto dphi = [&](double t) {
        return eta * hnorm - rho * hnorm * hnorm * (1.0 - t);
    };
    return bisect_derivative(dphi) * h;
}

/// Central finite difference of a scalar function of one coordinate.
inline double central_diff(const std::function<double(double)>& f, double x, double h) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

}  // namespace nel::testing

#endif
