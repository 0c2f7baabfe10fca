#ifndef NEL_MAOM_HPP
#define NEL_MAOM_HPP

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "nel/elcore.hpp"
#include "nel/graph.hpp"
#include "nel/run_report.hpp"
#include "nel/solver_config.hpp"

namespace nel {

/// Difference-variable ADMM state; z[l]/t[l] follow the edge order of the
/// graph the solver actually ran on (the spanning tree when requested).
struct MAOMState {
    std::vector<Eigen::VectorXd> lambda;
    std::vector<Eigen::VectorXd> z;
    std::vector<Eigen::VectorXd> t;
    int iterations = 0;
    double r2_norm = 0.0;
    double s2_norm = 0.0;
    bool converged = false;
};

/// Groupwise thresholding S(h, t) = (1 - t/||h||)_+ h; zero when ||h|| <= t.
Eigen::VectorXd soft_threshold(const Eigen::VectorXd& h, double threshold);

/// z = S(lambda_lo - lambda_hi + t/rho, eta/rho).
Eigen::VectorXd maom_z_update(const Eigen::VectorXd& lambda_lo, const Eigen::VectorXd& lambda_hi,
                              const Eigen::VectorXd& t, double rho, double eta);

/// Sum of lambda blocks in the given order (ascending incident edge index).
Eigen::VectorXd maom_neighbor_sum(const std::vector<const Eigen::VectorXd*>& lambdas, int r);

/// Sum of sign * (rho z - t) over incident edge blocks, +1 when the node is
/// the lower endpoint of the edge, -1 otherwise.
Eigen::VectorXd maom_signed_edge_sum(const std::vector<const Eigen::VectorXd*>& zs,
                                     const std::vector<const Eigen::VectorXd*>& ts,
                                     const std::vector<double>& signs, double rho, int r);

/// One closed-form node step:
///   [H + (2 rho deg + 1) I] lambda_next =
///     [H + (rho deg + 1) I] lambda + rho * neighbor_sum + signed_edge_sum - grad,
/// where H and grad come from the local objective at the current lambda.
Eigen::VectorXd maom_node_update(const Eigen::MatrixXd& hess, const Eigen::VectorXd& grad,
                                 const Eigen::VectorXd& lambda, double rho, int degree,
                                 const Eigen::VectorXd& neighbor_sum,
                                 const Eigen::VectorXd& signed_edge_sum);

/// Residuals and stopping tolerances after one full iteration:
///   r2 = A_stack Lambda - Z,   s2 = rho A_stack' (T_prev - T),
/// plus a stationarity guard on the damped multiplier step (the residual
/// pair is blind to the mode where all nodes agree but keep moving).
struct MaomResidualInfo {
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
MaomResidualInfo maom_residual_info(const Graph& g, const std::vector<Eigen::VectorXd>& lambda,
                                    const std::vector<Eigen::VectorXd>& prev_lambda,
                                    const std::vector<Eigen::VectorXd>& z,
                                    const std::vector<Eigen::VectorXd>& t,
                                    const std::vector<Eigen::VectorXd>& prev_t,
                                    const SolverConfig& config);

/// Full solver: iterates thresholding -> node solves -> duals from zero
/// starts until both residuals clear the tolerances. With use_spanning_tree
/// the iteration runs on spanning_tree(g) (fewer edge variables).
std::pair<MAOMState, RunReport> run_maom(const Graph& g,
                                         const std::vector<Eigen::MatrixXd>& node_scores,
                                         const SolverConfig& config,
                                         bool use_spanning_tree = false);
std::pair<MAOMState, RunReport> run_maom(const Graph& g,
                                         const std::vector<Eigen::MatrixXd>& node_data,
                                         const EstimatingFunction& ef, const Eigen::VectorXd& theta,
                                         const SolverConfig& config,
                                         bool use_spanning_tree = false);

}  // namespace nel

#endif
