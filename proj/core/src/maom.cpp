#include "nel/maom.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace nel {

Eigen::VectorXd soft_threshold(const Eigen::VectorXd& h, double threshold) {
    const double norm = h.norm();
    if (norm <= threshold) return Eigen::VectorXd::Zero(h.size());
    return (1.0 - threshold / norm) * h;
}

Eigen::VectorXd maom_z_update(const Eigen::VectorXd& lambda_lo, const Eigen::VectorXd& lambda_hi,
                              const Eigen::VectorXd& t, double rho, double eta) {
    return soft_threshold(lambda_lo - lambda_hi + t / rho, eta / rho);
}

Eigen::VectorXd maom_neighbor_sum(const std::vector<const Eigen::VectorXd*>& lambdas, int r) {
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(r);
    for (const Eigen::VectorXd* lam : lambdas) sum.noalias() += *lam;
    return sum;
}

Eigen::VectorXd maom_signed_edge_sum(const std::vector<const Eigen::VectorXd*>& zs,
                                     const std::vector<const Eigen::VectorXd*>& ts,
                                     const std::vector<double>& signs, double rho, int r) {
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(r);
    for (std::size_t k = 0; k < zs.size(); ++k) {
        sum.noalias() += signs[k] * (rho * *zs[k]);
        sum.noalias() -= signs[k] * *ts[k];
    }
    return sum;
}

Eigen::VectorXd maom_node_update(const Eigen::MatrixXd& hess, const Eigen::VectorXd& grad,
                                 const Eigen::VectorXd& lambda, double rho, int degree,
                                 const Eigen::VectorXd& neighbor_sum,
                                 const Eigen::VectorXd& signed_edge_sum) {
    const Eigen::Index r = lambda.size();
    const double rho_deg = rho * degree;
    Eigen::MatrixXd lhs = hess;
    lhs.diagonal().array() += 2.0 * rho_deg + 1.0;
    Eigen::MatrixXd mid = hess;
    mid.diagonal().array() += rho_deg + 1.0;
    const Eigen::VectorXd rhs =
        mid * lambda + rho * neighbor_sum + signed_edge_sum - grad;
    const Eigen::VectorXd next = lhs.llt().solve(rhs);
    if (!next.allFinite()) throw std::runtime_error("maom_node_update: solve failed");
    return next;
}

MaomResidualInfo maom_residual_info(const Graph& g, const std::vector<Eigen::VectorXd>& lambda,
                                    const std::vector<Eigen::VectorXd>& prev_lambda,
                                    const std::vector<Eigen::VectorXd>& z,
                                    const std::vector<Eigen::VectorXd>& t,
                                    const std::vector<Eigen::VectorXd>& prev_t,
                                    const SolverConfig& config) {
    const int K = g.node_count();
    const int M = g.edge_count();
    const auto r = static_cast<double>(lambda.front().size());
    const double rho = config.rho;

    MaomResidualInfo info;
    double r2_sq = 0.0, stacked_sq = 0.0, z_sq = 0.0;
    for (int l = 0; l < M; ++l) {
        const Edge& e = g.edge(l);
        const auto li = static_cast<std::size_t>(l);
        const Eigen::VectorXd diff =
            lambda[static_cast<std::size_t>(e.lo)] - lambda[static_cast<std::size_t>(e.hi)];
        r2_sq += (diff - z[li]).squaredNorm();
        stacked_sq += diff.squaredNorm();
        z_sq += z[li].squaredNorm();
        info.consensus_gap = std::max(info.consensus_gap, diff.norm());
    }
    double s2_sq = 0.0, dual_pullback_sq = 0.0, stat_sq = 0.0;
    for (int i = 0; i < K; ++i) {
        Eigen::VectorXd s_i = Eigen::VectorXd::Zero(lambda.front().size());
        Eigen::VectorXd t_i = Eigen::VectorXd::Zero(lambda.front().size());
        for (const Graph::IncidentEdge& ie : g.incident(i)) {
            const auto l = static_cast<std::size_t>(ie.edge);
            const double sign = ie.is_lo ? 1.0 : -1.0;
            s_i += sign * (prev_t[l] - t[l]);
            t_i += sign * t[l];
        }
        s2_sq += (rho * s_i).squaredNorm();
        dual_pullback_sq += t_i.squaredNorm();
        const double step = (lambda[static_cast<std::size_t>(i)] -
                             prev_lambda[static_cast<std::size_t>(i)]).norm();
        const double damping = 2.0 * rho * g.degree(i) + 1.0;
        stat_sq += damping * damping * step * step;
    }
    info.r_norm = std::sqrt(r2_sq);
    info.s_norm = std::sqrt(s2_sq);
    info.stat_norm = std::sqrt(stat_sq);
    info.eps_pri = config.eps_abs * std::sqrt(static_cast<double>(M) * r) +
                   config.eps_rel * std::max(std::sqrt(stacked_sq), std::sqrt(z_sq));
    // the dual residual carries rho-scaled increments, so its tolerance does too
    info.eps_dual = rho * (config.eps_abs * std::sqrt(static_cast<double>(K) * r) +
                           config.eps_rel * std::sqrt(dual_pullback_sq));
    // gradient-scale bound: the dual pullback approaches the stacked gradient
    info.eps_stat = config.eps_abs * std::sqrt(static_cast<double>(K) * r) +
                    config.eps_rel * std::sqrt(dual_pullback_sq);
    return info;
}

std::pair<MAOMState, RunReport> run_maom(const Graph& g,
                                         const std::vector<Eigen::MatrixXd>& node_scores,
                                         const SolverConfig& config, bool use_spanning_tree) {
    config.validate();
    if (use_spanning_tree) {
        const Graph tree = spanning_tree(g);
        return run_maom(tree, node_scores, config, false);
    }
    const int K = g.node_count();
    const int M = g.edge_count();
    if (static_cast<int>(node_scores.size()) != K)
        throw std::invalid_argument("run_maom: one score block per node required");
    for (const auto& block : node_scores)
        if (block.cols() != node_scores.front().cols())
            throw std::invalid_argument("run_maom: score block dimension mismatch");
    const int r = static_cast<int>(node_scores.front().cols());
    const double rho = config.rho;

    MAOMState state;
    state.lambda.assign(static_cast<std::size_t>(K), Eigen::VectorXd::Zero(r));
    state.z.assign(static_cast<std::size_t>(M), Eigen::VectorXd::Zero(r));
    state.t.assign(static_cast<std::size_t>(M), Eigen::VectorXd::Zero(r));

    RunReport report;
    const auto start = std::chrono::steady_clock::now();

    std::vector<Eigen::VectorXd> next_lambda(static_cast<std::size_t>(K));
    std::vector<Eigen::VectorXd> prev_lambda, prev_t, prev_z;
    for (int iter = 0; iter < config.max_iter; ++iter) {
        for (int l = 0; l < M; ++l) {
            const Edge& e = g.edge(l);
            state.z[static_cast<std::size_t>(l)] =
                maom_z_update(state.lambda[static_cast<std::size_t>(e.lo)],
                              state.lambda[static_cast<std::size_t>(e.hi)],
                              state.t[static_cast<std::size_t>(l)], rho, config.eta);
        }

        for (int i = 0; i < K; ++i) {
            std::vector<const Eigen::VectorXd*> nbr_lambda, zs, ts;
            std::vector<double> signs;
            for (const Graph::IncidentEdge& ie : g.incident(i)) {
                const auto l = static_cast<std::size_t>(ie.edge);
                nbr_lambda.push_back(&state.lambda[static_cast<std::size_t>(ie.other)]);
                zs.push_back(&state.z[l]);
                ts.push_back(&state.t[l]);
                signs.push_back(ie.is_lo ? 1.0 : -1.0);
            }
            const Eigen::VectorXd nbr_sum = maom_neighbor_sum(nbr_lambda, r);
            const Eigen::VectorXd edge_sum = maom_signed_edge_sum(zs, ts, signs, rho, r);
            const LocalObjective lo =
                local_objective(node_scores[static_cast<std::size_t>(i)],
                                state.lambda[static_cast<std::size_t>(i)], config.pseudo_log_eps);
            next_lambda[static_cast<std::size_t>(i)] =
                maom_node_update(lo.hess, lo.grad, state.lambda[static_cast<std::size_t>(i)], rho,
                                 g.degree(i), nbr_sum, edge_sum);
        }
        prev_lambda = state.lambda;
        state.lambda.swap(next_lambda);

        prev_t = state.t;
        for (int l = 0; l < M; ++l) {
            const Edge& e = g.edge(l);
            const auto li = static_cast<std::size_t>(l);
            state.t[li] += rho * (state.lambda[static_cast<std::size_t>(e.lo)] -
                                  state.lambda[static_cast<std::size_t>(e.hi)] - state.z[li]);
        }

        const MaomResidualInfo info =
            maom_residual_info(g, state.lambda, prev_lambda, state.z, state.t, prev_t, config);

        // textbook dual residual rho A' (Z^{t} - Z^{t-1}), diagnostic only
        double alt_sq = 0.0;
        if (!prev_z.empty()) {
            for (int i = 0; i < K; ++i) {
                Eigen::VectorXd alt_i = Eigen::VectorXd::Zero(r);
                for (const Graph::IncidentEdge& ie : g.incident(i)) {
                    const auto l = static_cast<std::size_t>(ie.edge);
                    const double sign = ie.is_lo ? 1.0 : -1.0;
                    alt_i += sign * (state.z[l] - prev_z[l]);
                }
                alt_sq += (rho * alt_i).squaredNorm();
            }
        }
        report.alt_dual_residual = std::sqrt(alt_sq);
        prev_z = state.z;

        state.r2_norm = info.r_norm;
        state.s2_norm = info.s_norm;
        state.iterations = iter + 1;

        IterStats row{iter + 1, info.r_norm, info.s_norm, info.consensus_gap,
                      std::numeric_limits<double>::quiet_NaN()};
        if (config.trace_statistic)
            row.statistic = el_statistic(state.lambda, node_scores, config.pseudo_log_eps);
        report.trace.push_back(row);
        if (config.record_lambda_history) report.lambda_history.push_back(state.lambda);
        report.final_consensus_gap = info.consensus_gap;

        if (info.within_tolerance()) {
            state.converged = true;
            break;
        }
    }

    report.iterations = state.iterations;
    report.converged = state.converged;
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    report.final_statistic = el_statistic(state.lambda, node_scores, config.pseudo_log_eps);
    return {std::move(state), std::move(report)};
}

std::pair<MAOMState, RunReport> run_maom(const Graph& g,
                                         const std::vector<Eigen::MatrixXd>& node_data,
                                         const EstimatingFunction& ef, const Eigen::VectorXd& theta,
                                         const SolverConfig& config, bool use_spanning_tree) {
    return run_maom(g, score_matrices(node_data, ef, theta), config, use_spanning_tree);
}

}  // namespace nel
