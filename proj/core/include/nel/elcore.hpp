#ifndef NEL_ELCORE_HPP
#define NEL_ELCORE_HPP

#include <Eigen/Dense>
#include <vector>

#include "nel/estfun.hpp"

namespace nel {

/// Pseudo-logarithm: log(z) for z >= eps, the C2 quadratic extension
/// log(eps) - 1.5 + 2z/eps - z^2/(2 eps^2) below. Total on all of R.
struct LogStar {
    double value;
    double d1;
    double d2;
};
LogStar log_star(double z, double eps);

/// Score matrix for one node: row j holds g(x_j; theta). Built once per
/// (data, theta); everything downstream works on it.
Eigen::MatrixXd score_matrix(const Eigen::MatrixXd& data, const EstimatingFunction& ef,
                             const Eigen::VectorXd& theta);

std::vector<Eigen::MatrixXd> score_matrices(const std::vector<Eigen::MatrixXd>& node_data,
                                            const EstimatingFunction& ef,
                                            const Eigen::VectorXd& theta);

/// Local objective ell_i(lambda) = -2 sum_j log_star(1 + lambda' g_j)
/// with its gradient and Hessian. The Hessian is PSD everywhere.
struct LocalObjective {
    double value;
    Eigen::VectorXd grad;
    Eigen::MatrixXd hess;
};
LocalObjective local_objective(const Eigen::MatrixXd& scores, const Eigen::VectorXd& lambda,
                               double eps);
LocalObjective local_objective(const Eigen::MatrixXd& data, const EstimatingFunction& ef,
                               const Eigen::VectorXd& theta, const Eigen::VectorXd& lambda,
                               double eps);

/// Objective value only (used by line searches).
double local_objective_value(const Eigen::MatrixXd& scores, const Eigen::VectorXd& lambda,
                             double eps);

struct NewtonReport {
    int iterations = 0;
    bool converged = false;
    double grad_norm = 0.0;
};

/// Pooled single-machine multiplier: damped Newton from zero on the summed
/// objective, stops at ||grad|| <= 1e-10 * N. Throws if 200 iterations do
/// not converge (degenerate second-moment matrix).
Eigen::VectorXd solve_reference(const std::vector<Eigen::MatrixXd>& node_scores, double eps,
                                NewtonReport* report = nullptr);
Eigen::VectorXd solve_reference(const std::vector<Eigen::MatrixXd>& node_data,
                                const EstimatingFunction& ef, const Eigen::VectorXd& theta,
                                double eps, NewtonReport* report = nullptr);

/// Distributed log-likelihood ratio statistic: -sum_i ell_i(lambda_i).
double el_statistic(const std::vector<Eigen::VectorXd>& lambdas,
                    const std::vector<Eigen::MatrixXd>& node_scores, double eps);

/// Default pseudo-log switch point: 1/N.
inline double default_pseudo_log_eps(long total_samples) {
    return 1.0 / static_cast<double>(total_samples);
}

}  // namespace nel

#endif
