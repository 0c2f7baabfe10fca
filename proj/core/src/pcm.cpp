#include "nel/pcm.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace nel {

std::pair<Eigen::VectorXd, Eigen::VectorXd> pcm_edge_update(
    const Eigen::VectorXd& lambda_lo, const Eigen::VectorXd& lambda_hi,
    const Eigen::VectorXd& v_lo, const Eigen::VectorXd& v_hi, double rho, double eta) {
    const Eigen::VectorXd a = lambda_lo + v_lo / rho;
    const Eigen::VectorXd b = lambda_hi + v_hi / rho;
    const double gap = rho * (a - b).norm();
    const double omega = gap > 0.0 ? std::max(1.0 - eta / gap, 0.5) : 0.5;
    return {omega * a + (1.0 - omega) * b, (1.0 - omega) * a + omega * b};
}

Eigen::VectorXd pcm_linear_term(const std::vector<const Eigen::VectorXd*>& duals,
                                const std::vector<const Eigen::VectorXd*>& copies, double rho,
                                int r) {
    Eigen::VectorXd term = Eigen::VectorXd::Zero(r);
    for (std::size_t k = 0; k < duals.size(); ++k) {
        term.noalias() += *duals[k];
        term.noalias() -= rho * *copies[k];
    }
    return term;
}

Eigen::VectorXd pcm_node_update(const Eigen::MatrixXd& scores, const Eigen::VectorXd& warm,
                                const Eigen::VectorXd& linear_term, double rho, int degree,
                                double pseudo_log_eps, double newton_tol, int newton_max_iter,
                                int* newton_iterations) {
    const double rho_deg = rho * degree;
    const double tol = newton_tol * (1.0 + rho_deg);
    const Eigen::Index r = warm.size();
    const Eigen::MatrixXd ridge = rho_deg * Eigen::MatrixXd::Identity(r, r);

    const auto merit = [&](const Eigen::VectorXd& lambda) {
        return local_objective_value(scores, lambda, pseudo_log_eps) + linear_term.dot(lambda) +
               0.5 * rho_deg * lambda.squaredNorm();
    };

    Eigen::VectorXd lambda = warm;
    double value = merit(lambda);
    for (int iter = 0; iter < newton_max_iter; ++iter) {
        const LocalObjective lo = local_objective(scores, lambda, pseudo_log_eps);
        const Eigen::VectorXd grad = lo.grad + linear_term + rho_deg * lambda;
        if (grad.norm() <= tol) {
            if (newton_iterations) *newton_iterations = iter;
            return lambda;
        }
        const Eigen::MatrixXd hess = lo.hess + ridge;
        const Eigen::VectorXd step = hess.llt().solve(-grad);
        double scale = 1.0;
        Eigen::VectorXd candidate = lambda + step;
        double cand_value = merit(candidate);
        int halving = 0;
        while (cand_value >= value && halving < 60) {
            scale *= 0.5;
            candidate = lambda + scale * step;
            cand_value = merit(candidate);
            ++halving;
        }
        if (cand_value >= value) {
            // the merit has hit machine precision; accept gradient progress instead
            candidate = lambda + step;
            const LocalObjective probe = local_objective(scores, candidate, pseudo_log_eps);
            const Eigen::VectorXd probe_grad = probe.grad + linear_term + rho_deg * candidate;
            if (probe_grad.norm() < grad.norm()) {
                lambda = candidate;
                value = merit(candidate);
                continue;
            }
            if (grad.norm() <= 100.0 * tol) {
                if (newton_iterations) *newton_iterations = iter;
                return lambda;
            }
            throw std::runtime_error("pcm_node_update: line search stalled");
        }
        lambda = candidate;
        value = cand_value;
    }
    const LocalObjective lo = local_objective(scores, lambda, pseudo_log_eps);
    if ((lo.grad + linear_term + rho_deg * lambda).norm() <= 100.0 * tol) {
        if (newton_iterations) *newton_iterations = newton_max_iter;
        return lambda;
    }
    throw std::runtime_error("pcm_node_update: inner Newton cap exceeded");
}

PcmResidualInfo pcm_residual_info(const Graph& g, const std::vector<Eigen::VectorXd>& lambda,
                                  const std::vector<Eigen::VectorXd>& prev_lambda,
                                  const std::vector<Eigen::VectorXd>& copy_lo,
                                  const std::vector<Eigen::VectorXd>& copy_hi,
                                  const std::vector<Eigen::VectorXd>& dual_lo,
                                  const std::vector<Eigen::VectorXd>& dual_hi,
                                  const std::vector<Eigen::VectorXd>& prev_dual_lo,
                                  const std::vector<Eigen::VectorXd>& prev_dual_hi,
                                  const SolverConfig& config) {
    const int K = g.node_count();
    const int M = g.edge_count();
    const auto r = static_cast<double>(lambda.front().size());
    const double rho = config.rho;

    PcmResidualInfo info;
    double r1_sq = 0.0, stacked_sq = 0.0, copies_sq = 0.0;
    for (int l = 0; l < M; ++l) {
        const Edge& e = g.edge(l);
        const auto li = static_cast<std::size_t>(l);
        const auto& lam_lo = lambda[static_cast<std::size_t>(e.lo)];
        const auto& lam_hi = lambda[static_cast<std::size_t>(e.hi)];
        r1_sq += (lam_lo - copy_lo[li]).squaredNorm() + (lam_hi - copy_hi[li]).squaredNorm();
        stacked_sq += lam_lo.squaredNorm() + lam_hi.squaredNorm();
        copies_sq += copy_lo[li].squaredNorm() + copy_hi[li].squaredNorm();
        info.consensus_gap = std::max(info.consensus_gap, (lam_lo - lam_hi).norm());
    }
    double s1_sq = 0.0, dual_pullback_sq = 0.0, stat_sq = 0.0;
    for (int i = 0; i < K; ++i) {
        Eigen::VectorXd s_i = Eigen::VectorXd::Zero(lambda.front().size());
        Eigen::VectorXd v_i = Eigen::VectorXd::Zero(lambda.front().size());
        for (const Graph::IncidentEdge& ie : g.incident(i)) {
            const auto l = static_cast<std::size_t>(ie.edge);
            const auto& cur = ie.is_lo ? dual_lo[l] : dual_hi[l];
            const auto& prev = ie.is_lo ? prev_dual_lo[l] : prev_dual_hi[l];
            s_i += prev - cur;
            v_i += cur;
        }
        s1_sq += (rho * s_i).squaredNorm();
        dual_pullback_sq += v_i.squaredNorm();
        const double step = (lambda[static_cast<std::size_t>(i)] -
                             prev_lambda[static_cast<std::size_t>(i)]).norm();
        const double damping = 2.0 * rho * g.degree(i);
        stat_sq += damping * damping * step * step;
    }
    info.r_norm = std::sqrt(r1_sq);
    info.s_norm = std::sqrt(s1_sq);
    info.stat_norm = std::sqrt(stat_sq);
    info.eps_pri = config.eps_abs * std::sqrt(2.0 * M * r) +
                   config.eps_rel * std::max(std::sqrt(stacked_sq), std::sqrt(copies_sq));
    // the dual residual carries rho-scaled increments, so its tolerance does too
    info.eps_dual = rho * (config.eps_abs * std::sqrt(static_cast<double>(K) * r) +
                           config.eps_rel * std::sqrt(dual_pullback_sq));
    // gradient-scale bound: the dual pullback equals the stacked gradient here
    info.eps_stat = config.eps_abs * std::sqrt(static_cast<double>(K) * r) +
                    config.eps_rel * std::sqrt(dual_pullback_sq);
    return info;
}

std::pair<PCMState, RunReport> run_pcm(const Graph& g,
                                       const std::vector<Eigen::MatrixXd>& node_scores,
                                       const SolverConfig& config) {
    config.validate();
    const int K = g.node_count();
    const int M = g.edge_count();
    if (static_cast<int>(node_scores.size()) != K)
        throw std::invalid_argument("run_pcm: one score block per node required");
    for (const auto& block : node_scores)
        if (block.cols() != node_scores.front().cols())
            throw std::invalid_argument("run_pcm: score block dimension mismatch");
    const int r = static_cast<int>(node_scores.front().cols());
    const double rho = config.rho;

    PCMState state;
    state.lambda.assign(static_cast<std::size_t>(K), Eigen::VectorXd::Zero(r));
    state.copy_lo.assign(static_cast<std::size_t>(M), Eigen::VectorXd::Zero(r));
    state.copy_hi.assign(static_cast<std::size_t>(M), Eigen::VectorXd::Zero(r));
    state.dual_lo.assign(static_cast<std::size_t>(M), Eigen::VectorXd::Zero(r));
    state.dual_hi.assign(static_cast<std::size_t>(M), Eigen::VectorXd::Zero(r));

    RunReport report;
    const auto start = std::chrono::steady_clock::now();

    std::vector<Eigen::VectorXd> prev_lambda, prev_dual_lo, prev_dual_hi, prev_copy_lo,
        prev_copy_hi;
    for (int t = 0; t < config.max_iter; ++t) {
        // copies first: the edge step is closed-form, the node step is not
        for (int l = 0; l < M; ++l) {
            const Edge& e = g.edge(l);
            auto [c_lo, c_hi] =
                pcm_edge_update(state.lambda[static_cast<std::size_t>(e.lo)],
                                state.lambda[static_cast<std::size_t>(e.hi)],
                                state.dual_lo[static_cast<std::size_t>(l)],
                                state.dual_hi[static_cast<std::size_t>(l)], rho, config.eta);
            state.copy_lo[static_cast<std::size_t>(l)] = std::move(c_lo);
            state.copy_hi[static_cast<std::size_t>(l)] = std::move(c_hi);
        }

        prev_lambda = state.lambda;
        for (int i = 0; i < K; ++i) {
            std::vector<const Eigen::VectorXd*> duals, copies;
            for (const Graph::IncidentEdge& ie : g.incident(i)) {
                const auto l = static_cast<std::size_t>(ie.edge);
                duals.push_back(ie.is_lo ? &state.dual_lo[l] : &state.dual_hi[l]);
                copies.push_back(ie.is_lo ? &state.copy_lo[l] : &state.copy_hi[l]);
            }
            const Eigen::VectorXd term = pcm_linear_term(duals, copies, rho, r);
            state.lambda[static_cast<std::size_t>(i)] = pcm_node_update(
                node_scores[static_cast<std::size_t>(i)], state.lambda[static_cast<std::size_t>(i)],
                term, rho, g.degree(i), config.pseudo_log_eps, config.newton_tol,
                config.newton_max_iter);
        }

        prev_dual_lo = state.dual_lo;
        prev_dual_hi = state.dual_hi;
        for (int l = 0; l < M; ++l) {
            const Edge& e = g.edge(l);
            const auto li = static_cast<std::size_t>(l);
            state.dual_lo[li] += rho * (state.lambda[static_cast<std::size_t>(e.lo)] - state.copy_lo[li]);
            state.dual_hi[li] += rho * (state.lambda[static_cast<std::size_t>(e.hi)] - state.copy_hi[li]);
        }

        const PcmResidualInfo info =
            pcm_residual_info(g, state.lambda, prev_lambda, state.copy_lo, state.copy_hi,
                              state.dual_lo, state.dual_hi, prev_dual_lo, prev_dual_hi, config);

        // textbook dual residual rho A' (C^{t} - C^{t-1}), diagnostic only
        double alt_sq = 0.0;
        if (!prev_copy_lo.empty()) {
            for (int i = 0; i < K; ++i) {
                Eigen::VectorXd alt_i = Eigen::VectorXd::Zero(r);
                for (const Graph::IncidentEdge& ie : g.incident(i)) {
                    const auto l = static_cast<std::size_t>(ie.edge);
                    const auto& ccur = ie.is_lo ? state.copy_lo[l] : state.copy_hi[l];
                    const auto& cprev = ie.is_lo ? prev_copy_lo[l] : prev_copy_hi[l];
                    alt_i += ccur - cprev;
                }
                alt_sq += (rho * alt_i).squaredNorm();
            }
        }
        report.alt_dual_residual = std::sqrt(alt_sq);
        prev_copy_lo = state.copy_lo;
        prev_copy_hi = state.copy_hi;

        state.r1_norm = info.r_norm;
        state.s1_norm = info.s_norm;
        state.iterations = t + 1;

        IterStats row{t + 1, info.r_norm, info.s_norm, info.consensus_gap,
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

std::pair<PCMState, RunReport> run_pcm(const Graph& g,
                                       const std::vector<Eigen::MatrixXd>& node_data,
                                       const EstimatingFunction& ef, const Eigen::VectorXd& theta,
                                       const SolverConfig& config) {
    return run_pcm(g, score_matrices(node_data, ef, theta), config);
}

}  // namespace nel
