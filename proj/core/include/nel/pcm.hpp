#ifndef NEL_PCM_HPP
#define NEL_PCM_HPP

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "nel/elcore.hpp"
#include "nel/graph.hpp"
#include "nel/run_report.hpp"
#include "nel/solver_config.hpp"

namespace nel {

/// Pairwise-copy ADMM state. Edge blocks follow the graph's edge order:
/// copy_lo[l]/dual_lo[l] belong to the lower endpoint of edge l,
/// copy_hi[l]/dual_hi[l] to the upper endpoint.
struct PCMState {
    std::vector<Eigen::VectorXd> lambda;
    std::vector<Eigen::VectorXd> copy_lo, copy_hi;
    std::vector<Eigen::VectorXd> dual_lo, dual_hi;
    int iterations = 0;
    double r1_norm = 0.0;
    double s1_norm = 0.0;
    bool converged = false;
};

/// Closed-form edge step: with a = lambda_lo + v_lo/rho and
/// b = lambda_hi + v_hi/rho,
///   omega = max{1 - eta / (rho ||a - b||), 0.5}  (0.5 when a == b),
///   c_lo = omega a + (1-omega) b,  c_hi = (1-omega) a + omega b.
std::pair<Eigen::VectorXd, Eigen::VectorXd> pcm_edge_update(
    const Eigen::VectorXd& lambda_lo, const Eigen::VectorXd& lambda_hi,
    const Eigen::VectorXd& v_lo, const Eigen::VectorXd& v_hi, double rho, double eta);

/// Linear term sum_l (v_l - rho c_l) over a node's incident edge blocks,
/// accumulated in the given (ascending edge index) order. Shared by the
/// monolithic and decentralized runners so their arithmetic is identical.
Eigen::VectorXd pcm_linear_term(const std::vector<const Eigen::VectorXd*>& duals,
                                const std::vector<const Eigen::VectorXd*>& copies, double rho,
                                int r);

/// Node step: minimizes ell_i(lambda) + linear_term' lambda
/// + (rho deg / 2) ||lambda||^2 by damped Newton warm-started at `warm`.
/// Stops at gradient norm <= newton_tol * (1 + rho deg).
Eigen::VectorXd pcm_node_update(const Eigen::MatrixXd& scores, const Eigen::VectorXd& warm,
                                const Eigen::VectorXd& linear_term, double rho, int degree,
                                double pseudo_log_eps, double newton_tol, int newton_max_iter,
                                int* newton_iterations = nullptr);

/// Residuals and stopping tolerances after one full iteration:
///   r1 = A_LR_stack Lambda - C,   s1 = rho A_LR_stack' (V_prev - V),
/// plus a stationarity guard on the damped multiplier step. The guard
/// catches the drift mode where the nodes agree but their common value is
/// still moving; both named residuals are blind to it.
struct PcmResidualInfo {
    double r_norm = 0.0;
    double s_norm = 0.0;
    double stat_norm = 0.0;
    double consensus_gap = 0.0;
    double eps_pri = 0.0;
    double eps_dual = 0.0;
    double eps_stat = 0.0;
    bool within_tolerance() const {
        return r_norm <= eps_pri && s_norm <= eps_dual && stat_norm <= eps_stat;
    }
};
PcmResidualInfo pcm_residual_info(const Graph& g, const std::vector<Eigen::VectorXd>& lambda,
                                  const std::vector<Eigen::VectorXd>& prev_lambda,
                                  const std::vector<Eigen::VectorXd>& copy_lo,
                                  const std::vector<Eigen::VectorXd>& copy_hi,
                                  const std::vector<Eigen::VectorXd>& dual_lo,
                                  const std::vector<Eigen::VectorXd>& dual_hi,
                                  const std::vector<Eigen::VectorXd>& prev_dual_lo,
                                  const std::vector<Eigen::VectorXd>& prev_dual_hi,
                                  const SolverConfig& config);

/// Full solver: iterates copies -> multipliers -> duals from zero starts
/// until the primal and dual residuals clear the relative/absolute
/// tolerances, or max_iter is hit (state returned with converged = false).
std::pair<PCMState, RunReport> run_pcm(const Graph& g,
                                       const std::vector<Eigen::MatrixXd>& node_scores,
                                       const SolverConfig& config);
std::pair<PCMState, RunReport> run_pcm(const Graph& g,
                                       const std::vector<Eigen::MatrixXd>& node_data,
                                       const EstimatingFunction& ef, const Eigen::VectorXd& theta,
                                       const SolverConfig& config);

}  // namespace nel

#endif
