#ifndef NEL_ESTFUN_HPP
#define NEL_ESTFUN_HPP

#include <Eigen/Dense>
#include <functional>
#include <string>

#include "nel/rng.hpp"

namespace nel {

/// An r-dimensional estimating function g(x; theta) over d-dimensional
/// observations and a p-dimensional parameter, r >= p.
struct EstimatingFunction {
    int obs_dim = 0;    // d
    int param_dim = 0;  // p
    int eq_dim = 0;     // r
    std::function<void(const Eigen::VectorXd& x, const Eigen::VectorXd& theta,
                       Eigen::Ref<Eigen::VectorXd> out)>
        eval;
    /// Optional analytic d g / d theta for one observation (r x p); used by
    /// finite-difference cross checks and debugging, never by the solvers.
    std::function<void(const Eigen::VectorXd& x, const Eigen::VectorXd& theta,
                       Eigen::Ref<Eigen::MatrixXd> out)>
        jacobian;

    Eigen::VectorXd operator()(const Eigen::VectorXd& x, const Eigen::VectorXd& theta) const {
        Eigen::VectorXd out(eq_dim);
        eval(x, theta, out);
        return out;
    }
};

/// Quantile score: g(X; beta) = psi(X - beta) with psi(x) = -1 for x <= 0
/// and tau/(1-tau) otherwise. d = p = r = 1.
EstimatingFunction quantile_ef(double tau);

/// Linear-model score g(Z; beta) = X (Y - X^T beta), observation Z = (Y, X).
/// p = r = d.
EstimatingFunction linear_ef(int d);

/// Logistic score g(Z; beta) = X (Y - sigmoid(X^T beta)), Y in {0,1}.
/// p = r = d.
EstimatingFunction logistic_ef(int d);

/// Mean score g(X; mu) = X - mu. p = r = d.
EstimatingFunction mean_ef(int d);

/// Repeated-measures score with three time points and 2-dimensional
/// covariates: observation (Y1,Y2,Y3, X1, X2, X3), p = 2, r = 4.
/// g stacks two blocks built from M1 = I3 and M2 = compound symmetry (0.5).
EstimatingFunction repeated_ef();

/// A family bundles the score with the synthetic-data generator used by the
/// experiment harness: the true parameter, a per-observation sampler, and a
/// pooled point estimator for profiling.
struct FamilySpec {
    std::string name;
    EstimatingFunction ef;
    Eigen::VectorXd theta0;
    std::function<Eigen::VectorXd(Rng&)> sample;
    std::function<Eigen::VectorXd(const Eigen::MatrixXd& pooled)> point_estimate;
};

/// Families by name: "quantile", "linear", "logistic", "mean", "repeated".
/// `d` selects the covariate dimension where the family admits one
/// (0 picks the default: 5 for linear/logistic, 3 for mean).
FamilySpec make_family(const std::string& name, int d = 0);

/// Lower-triangular Cholesky factor of the AR(1) matrix sigma_ab = 0.5^|a-b|.
Eigen::MatrixXd ar1_cholesky(int d);

/// Lower-triangular Cholesky factor of compound symmetry: unit diagonal,
/// 0.5 off-diagonal.
Eigen::MatrixXd compound_symmetry_cholesky(int d);

}  // namespace nel

#endif
