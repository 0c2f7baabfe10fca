#include "nel/netsim.hpp"

#include <chrono>
#include <map>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace nel {

namespace {

/// In-process message fabric. Sends are validated against the graph and
/// tallied; delivery happens at phase barriers only.
class VirtualNetwork {
  public:
    VirtualNetwork(const Graph& g, int block_dim)
        : g_(g),
          block_dim_(block_dim),
          pending_(static_cast<std::size_t>(g.node_count())),
          inbox_(static_cast<std::size_t>(g.node_count())) {}

    void send(int sender, int receiver, PayloadKind kind, int edge,
              std::vector<Eigen::VectorXd> blocks) {
        if (receiver < 0 || receiver >= g_.node_count() || !g_.has_edge(sender, receiver)) {
            std::ostringstream msg;
            msg << "round " << round_ << ": node " << sender << " attempted to reach node "
                << receiver << " without an edge";
            certificate_.violations.push_back(msg.str());
            throw std::logic_error(certificate_.violations.back());
        }
        for (const auto& b : blocks)
            if (b.size() != block_dim_)
                throw std::invalid_argument("message block dimension mismatch");
        tally(sender, receiver, static_cast<int>(blocks.size()));
        Message m;
        m.sender = sender;
        m.receiver = receiver;
        m.round = round_;
        m.kind = kind;
        m.edge = edge;
        m.blocks = std::move(blocks);
        pending_[static_cast<std::size_t>(receiver)].push_back(std::move(m));
    }

    void barrier() {
        for (std::size_t i = 0; i < pending_.size(); ++i) {
            auto& box = inbox_[i];
            for (auto& m : pending_[i]) box.push_back(std::move(m));
            pending_[i].clear();
        }
    }

    std::vector<Message> take_inbox(int node) {
        return std::exchange(inbox_[static_cast<std::size_t>(node)], {});
    }

    void next_round() { ++round_; }
    int round() const { return round_; }

    LocalityCertificate finish() {
        for (std::size_t t = 0; t < round_tallies_.size(); ++t)
            for (std::size_t i = 0; i < round_tallies_[t].size(); ++i) {
                const auto& [msgs, blocks] = round_tallies_[t][i];
                if (msgs == 0) continue;
                certificate_.traffic.push_back(
                    {static_cast<int>(t), static_cast<int>(i), msgs, blocks});
            }
        for (const auto& [pair, msgs] : pair_counts_)
            certificate_.pair_messages.push_back({pair.first, pair.second, msgs});
        return std::move(certificate_);
    }

  private:
    void tally(int sender, int receiver, int blocks) {
        while (round_tallies_.size() <= static_cast<std::size_t>(round_))
            round_tallies_.emplace_back(static_cast<std::size_t>(g_.node_count()),
                                        std::pair<int, int>{0, 0});
        auto& cell = round_tallies_[static_cast<std::size_t>(round_)][static_cast<std::size_t>(sender)];
        cell.first += 1;
        cell.second += blocks;
        certificate_.total_messages += 1;
        certificate_.total_blocks += blocks;
        pair_counts_[{sender, receiver}] += 1;
    }

    const Graph& g_;
    int block_dim_;
    int round_ = 0;
    std::vector<std::vector<Message>> pending_;
    std::vector<std::vector<Message>> inbox_;
    std::vector<std::vector<std::pair<int, int>>> round_tallies_;
    std::map<std::pair<int, int>, long> pair_counts_;
    LocalityCertificate certificate_;
};

/// A node's private slice of the PCM state: its multiplier plus the copy
/// and dual blocks of its own edge sides, and the last shares received
/// from each co-endpoint.
struct PcmActor {
    int id = 0;
    const Eigen::MatrixXd* scores = nullptr;
    Eigen::VectorXd lambda;
    std::vector<Eigen::VectorXd> dual, copy;              // slot k = incident edge k
    std::vector<Eigen::VectorXd> nbr_lambda, nbr_dual;    // co-endpoint shares

    int slot_of_edge(const Graph& g, int edge) const {
        const auto& inc = g.incident(id);
        for (std::size_t k = 0; k < inc.size(); ++k)
            if (inc[k].edge == edge) return static_cast<int>(k);
        throw std::logic_error("pcm actor: unknown edge");
    }

    void drain(const Graph& g, std::vector<Message> msgs) {
        for (auto& m : msgs) {
            const int k = slot_of_edge(g, m.edge);
            nbr_lambda[static_cast<std::size_t>(k)] = std::move(m.blocks[0]);
            nbr_dual[static_cast<std::size_t>(k)] = std::move(m.blocks[1]);
        }
    }
};

struct MaomActor {
    int id = 0;
    const Eigen::MatrixXd* scores = nullptr;
    Eigen::VectorXd lambda;
    std::vector<Eigen::VectorXd> z, t;           // meaningful on owned slots; mirrored otherwise
    std::vector<Eigen::VectorXd> nbr_lambda;     // latest broadcast per incident edge

    int slot_of_edge(const Graph& g, int edge) const {
        const auto& inc = g.incident(id);
        for (std::size_t k = 0; k < inc.size(); ++k)
            if (inc[k].edge == edge) return static_cast<int>(k);
        throw std::logic_error("maom actor: unknown edge");
    }

    void drain(const Graph& g, std::vector<Message> msgs) {
        for (auto& m : msgs) {
            if (m.kind == PayloadKind::lambda_share && m.edge < 0) {
                for (std::size_t k = 0; k < g.incident(id).size(); ++k)
                    if (g.incident(id)[k].other == m.sender)
                        nbr_lambda[k] = m.blocks[0];
            } else if (m.kind == PayloadKind::lambda_share) {
                nbr_lambda[static_cast<std::size_t>(slot_of_edge(g, m.edge))] = std::move(m.blocks[0]);
            } else {
                const int k = slot_of_edge(g, m.edge);
                z[static_cast<std::size_t>(k)] = std::move(m.blocks[0]);
                t[static_cast<std::size_t>(k)] = std::move(m.blocks[1]);
            }
        }
    }
};

DecentralizedResult run_pcm_decentralized(const Graph& g,
                                          const std::vector<Eigen::MatrixXd>& node_scores,
                                          const SolverConfig& config) {
    const int K = g.node_count();
    const int M = g.edge_count();
    const int r = static_cast<int>(node_scores.front().cols());
    const double rho = config.rho;

    VirtualNetwork net(g, r);
    std::vector<PcmActor> actors(static_cast<std::size_t>(K));
    for (int i = 0; i < K; ++i) {
        auto& a = actors[static_cast<std::size_t>(i)];
        a.id = i;
        a.scores = &node_scores[static_cast<std::size_t>(i)];
        a.lambda = Eigen::VectorXd::Zero(r);
        const auto deg = static_cast<std::size_t>(g.degree(i));
        a.dual.assign(deg, Eigen::VectorXd::Zero(r));
        a.copy.assign(deg, Eigen::VectorXd::Zero(r));
        a.nbr_lambda.assign(deg, Eigen::VectorXd::Zero(r));
        a.nbr_dual.assign(deg, Eigen::VectorXd::Zero(r));
    }

    RunReport report;
    const auto start = std::chrono::steady_clock::now();

    // observer bookkeeping, assembled from actor state after each round
    std::vector<Eigen::VectorXd> obs_lambda(static_cast<std::size_t>(K), Eigen::VectorXd::Zero(r)),
        obs_copy_lo(static_cast<std::size_t>(M)), obs_copy_hi(static_cast<std::size_t>(M)),
        obs_dual_lo(static_cast<std::size_t>(M), Eigen::VectorXd::Zero(r)),
        obs_dual_hi(static_cast<std::size_t>(M), Eigen::VectorXd::Zero(r)), prev_obs_lambda,
        prev_dual_lo, prev_dual_hi;

    PCMState state;
    bool converged = false;
    int iterations = 0;
    for (int round = 0; round < config.max_iter; ++round) {
        // share: both endpoints exchange (lambda, dual) for every edge
        for (int i = 0; i < K; ++i) {
            auto& a = actors[static_cast<std::size_t>(i)];
            const auto& inc = g.incident(i);
            for (std::size_t k = 0; k < inc.size(); ++k)
                net.send(i, inc[k].other, PayloadKind::edge_var_share, inc[k].edge,
                         {a.lambda, a.dual[k]});
        }
        net.barrier();
        for (int i = 0; i < K; ++i)
            actors[static_cast<std::size_t>(i)].drain(g, net.take_inbox(i));

        // edge step, computed at both endpoints with identical inputs
        for (int i = 0; i < K; ++i) {
            auto& a = actors[static_cast<std::size_t>(i)];
            const auto& inc = g.incident(i);
            for (std::size_t k = 0; k < inc.size(); ++k) {
                const auto [c_lo, c_hi] =
                    inc[k].is_lo
                        ? pcm_edge_update(a.lambda, a.nbr_lambda[k], a.dual[k], a.nbr_dual[k],
                                          rho, config.eta)
                        : pcm_edge_update(a.nbr_lambda[k], a.lambda, a.nbr_dual[k], a.dual[k],
                                          rho, config.eta);
                a.copy[k] = inc[k].is_lo ? c_lo : c_hi;
            }
        }

        // node solve
        for (int i = 0; i < K; ++i) {
            auto& a = actors[static_cast<std::size_t>(i)];
            std::vector<const Eigen::VectorXd*> duals, copies;
            for (std::size_t k = 0; k < g.incident(i).size(); ++k) {
                duals.push_back(&a.dual[k]);
                copies.push_back(&a.copy[k]);
            }
            const Eigen::VectorXd term = pcm_linear_term(duals, copies, rho, r);
            a.lambda = pcm_node_update(*a.scores, a.lambda, term, rho, g.degree(i),
                                       config.pseudo_log_eps, config.newton_tol,
                                       config.newton_max_iter);
        }

        // dual ascent, local at each endpoint
        for (int i = 0; i < K; ++i) {
            auto& a = actors[static_cast<std::size_t>(i)];
            for (std::size_t k = 0; k < g.incident(i).size(); ++k)
                a.dual[k] += rho * (a.lambda - a.copy[k]);
        }

        // observer: assemble global views and evaluate the stopping rule
        prev_obs_lambda = obs_lambda;
        prev_dual_lo = obs_dual_lo;
        prev_dual_hi = obs_dual_hi;
        for (int i = 0; i < K; ++i) obs_lambda[static_cast<std::size_t>(i)] = actors[static_cast<std::size_t>(i)].lambda;
        for (int i = 0; i < K; ++i) {
            const auto& a = actors[static_cast<std::size_t>(i)];
            const auto& inc = g.incident(i);
            for (std::size_t k = 0; k < inc.size(); ++k) {
                const auto l = static_cast<std::size_t>(inc[k].edge);
                if (inc[k].is_lo) {
                    obs_copy_lo[l] = a.copy[k];
                    obs_dual_lo[l] = a.dual[k];
                } else {
                    obs_copy_hi[l] = a.copy[k];
                    obs_dual_hi[l] = a.dual[k];
                }
            }
        }
        const PcmResidualInfo info =
            pcm_residual_info(g, obs_lambda, prev_obs_lambda, obs_copy_lo, obs_copy_hi,
                              obs_dual_lo, obs_dual_hi, prev_dual_lo, prev_dual_hi, config);
        iterations = round + 1;
        IterStats rowstats{round + 1, info.r_norm, info.s_norm, info.consensus_gap,
                           std::numeric_limits<double>::quiet_NaN()};
        if (config.trace_statistic)
            rowstats.statistic = el_statistic(obs_lambda, node_scores, config.pseudo_log_eps);
        report.trace.push_back(rowstats);
        if (config.record_lambda_history) report.lambda_history.push_back(obs_lambda);
        report.final_consensus_gap = info.consensus_gap;
        state.r1_norm = info.r_norm;
        state.s1_norm = info.s_norm;
        net.next_round();
        if (info.within_tolerance()) {
            converged = true;
            break;
        }
    }

    state.lambda = obs_lambda;
    state.copy_lo = obs_copy_lo;
    state.copy_hi = obs_copy_hi;
    state.dual_lo = obs_dual_lo;
    state.dual_hi = obs_dual_hi;
    state.iterations = iterations;
    state.converged = converged;

    report.iterations = iterations;
    report.converged = converged;
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    report.final_statistic = el_statistic(obs_lambda, node_scores, config.pseudo_log_eps);

    DecentralizedResult result;
    result.algorithm = Algorithm::pcm;
    result.lambda = obs_lambda;
    result.pcm_state = std::move(state);
    result.report = std::move(report);
    result.certificate = net.finish();
    return result;
}

DecentralizedResult run_maom_decentralized(const Graph& g,
                                           const std::vector<Eigen::MatrixXd>& node_scores,
                                           const SolverConfig& config) {
    const int K = g.node_count();
    const int M = g.edge_count();
    const int r = static_cast<int>(node_scores.front().cols());
    const double rho = config.rho;

    VirtualNetwork net(g, r);
    std::vector<MaomActor> actors(static_cast<std::size_t>(K));
    for (int i = 0; i < K; ++i) {
        auto& a = actors[static_cast<std::size_t>(i)];
        a.id = i;
        a.scores = &node_scores[static_cast<std::size_t>(i)];
        a.lambda = Eigen::VectorXd::Zero(r);
        const auto deg = static_cast<std::size_t>(g.degree(i));
        a.z.assign(deg, Eigen::VectorXd::Zero(r));
        a.t.assign(deg, Eigen::VectorXd::Zero(r));
        a.nbr_lambda.assign(deg, Eigen::VectorXd::Zero(r));
    }

    RunReport report;
    const auto start = std::chrono::steady_clock::now();

    std::vector<Eigen::VectorXd> obs_lambda(static_cast<std::size_t>(K), Eigen::VectorXd::Zero(r)),
        obs_z(static_cast<std::size_t>(M)),
        obs_t(static_cast<std::size_t>(M), Eigen::VectorXd::Zero(r)), prev_obs_lambda, prev_t;

    bool converged = false;
    int iterations = 0;
    for (int round = 0; round < config.max_iter; ++round) {
        // broadcast multipliers to all neighbors
        for (int i = 0; i < K; ++i) {
            const auto& a = actors[static_cast<std::size_t>(i)];
            for (int nbr : g.neighbors(i))
                net.send(i, nbr, PayloadKind::lambda_share, -1, {a.lambda});
        }
        net.barrier();
        for (int i = 0; i < K; ++i)
            actors[static_cast<std::size_t>(i)].drain(g, net.take_inbox(i));

        // edge owners: finish the previous round's dual step, then threshold
        for (int i = 0; i < K; ++i) {
            auto& a = actors[static_cast<std::size_t>(i)];
            const auto& inc = g.incident(i);
            for (std::size_t k = 0; k < inc.size(); ++k) {
                if (!inc[k].is_lo) continue;
                if (round > 0) a.t[k] += rho * (a.lambda - a.nbr_lambda[k] - a.z[k]);
                a.z[k] = maom_z_update(a.lambda, a.nbr_lambda[k], a.t[k], rho, config.eta);
                net.send(i, inc[k].other, PayloadKind::edge_var_share, inc[k].edge,
                         {a.z[k], a.t[k]});
            }
        }
        net.barrier();
        for (int i = 0; i < K; ++i)
            actors[static_cast<std::size_t>(i)].drain(g, net.take_inbox(i));

        // node solve from the broadcast snapshot and fresh edge blocks
        for (int i = 0; i < K; ++i) {
            auto& a = actors[static_cast<std::size_t>(i)];
            const auto& inc = g.incident(i);
            std::vector<const Eigen::VectorXd*> nbr_ptrs, zs, ts;
            std::vector<double> signs;
            for (std::size_t k = 0; k < inc.size(); ++k) {
                nbr_ptrs.push_back(&a.nbr_lambda[k]);
                zs.push_back(&a.z[k]);
                ts.push_back(&a.t[k]);
                signs.push_back(inc[k].is_lo ? 1.0 : -1.0);
            }
            const Eigen::VectorXd nbr_sum = maom_neighbor_sum(nbr_ptrs, r);
            const Eigen::VectorXd edge_sum = maom_signed_edge_sum(zs, ts, signs, rho, r);
            const LocalObjective lo = local_objective(*a.scores, a.lambda, config.pseudo_log_eps);
            a.lambda = maom_node_update(lo.hess, lo.grad, a.lambda, rho, g.degree(i), nbr_sum,
                                        edge_sum);
        }

        // observer: the actors' duals lag one round, so the would-be duals
        // are reconstructed here for the stopping rule (observer-only)
        prev_obs_lambda = obs_lambda;
        prev_t = obs_t;
        for (int i = 0; i < K; ++i) obs_lambda[static_cast<std::size_t>(i)] = actors[static_cast<std::size_t>(i)].lambda;
        for (int i = 0; i < K; ++i) {
            const auto& a = actors[static_cast<std::size_t>(i)];
            const auto& inc = g.incident(i);
            for (std::size_t k = 0; k < inc.size(); ++k)
                if (inc[k].is_lo) {
                    obs_z[static_cast<std::size_t>(inc[k].edge)] = a.z[k];
                    obs_t[static_cast<std::size_t>(inc[k].edge)] = a.t[k];
                }
        }
        for (int l = 0; l < M; ++l) {
            const Edge& e = g.edge(l);
            const auto li = static_cast<std::size_t>(l);
            obs_t[li] += rho * (obs_lambda[static_cast<std::size_t>(e.lo)] -
                                obs_lambda[static_cast<std::size_t>(e.hi)] - obs_z[li]);
        }
        const MaomResidualInfo info =
            maom_residual_info(g, obs_lambda, prev_obs_lambda, obs_z, obs_t, prev_t, config);
        iterations = round + 1;
        IterStats rowstats{round + 1, info.r_norm, info.s_norm, info.consensus_gap,
                           std::numeric_limits<double>::quiet_NaN()};
        if (config.trace_statistic)
            rowstats.statistic = el_statistic(obs_lambda, node_scores, config.pseudo_log_eps);
        report.trace.push_back(rowstats);
        if (config.record_lambda_history) report.lambda_history.push_back(obs_lambda);
        report.final_consensus_gap = info.consensus_gap;
        net.next_round();
        if (info.within_tolerance()) {
            converged = true;
            break;
        }
    }

    // flush: upper endpoints report their final multipliers so the edge
    // owners can complete the last dual step
    for (int i = 0; i < K; ++i) {
        const auto& a = actors[static_cast<std::size_t>(i)];
        const auto& inc = g.incident(i);
        for (std::size_t k = 0; k < inc.size(); ++k)
            if (!inc[k].is_lo)
                net.send(i, inc[k].other, PayloadKind::lambda_share, inc[k].edge, {a.lambda});
    }
    net.barrier();
    for (int i = 0; i < K; ++i)
        actors[static_cast<std::size_t>(i)].drain(g, net.take_inbox(i));
    for (int i = 0; i < K; ++i) {
        auto& a = actors[static_cast<std::size_t>(i)];
        const auto& inc = g.incident(i);
        for (std::size_t k = 0; k < inc.size(); ++k)
            if (inc[k].is_lo) a.t[k] += rho * (a.lambda - a.nbr_lambda[k] - a.z[k]);
    }

    MAOMState state;
    state.lambda = obs_lambda;
    state.z = obs_z;
    state.t.assign(static_cast<std::size_t>(M), Eigen::VectorXd::Zero(r));
    for (int i = 0; i < K; ++i) {
        const auto& a = actors[static_cast<std::size_t>(i)];
        const auto& inc = g.incident(i);
        for (std::size_t k = 0; k < inc.size(); ++k)
            if (inc[k].is_lo) state.t[static_cast<std::size_t>(inc[k].edge)] = a.t[k];
    }
    state.iterations = iterations;
    state.converged = converged;
    state.r2_norm = report.trace.back().r_norm;
    state.s2_norm = report.trace.back().s_norm;

    report.iterations = iterations;
    report.converged = converged;
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    report.final_statistic = el_statistic(obs_lambda, node_scores, config.pseudo_log_eps);

    DecentralizedResult result;
    result.algorithm = Algorithm::maom;
    result.lambda = obs_lambda;
    result.maom_state = std::move(state);
    result.report = std::move(report);
    result.certificate = net.finish();
    return result;
}

}  // namespace

std::string LocalityCertificate::csv() const {
    std::ostringstream out;
    out << "node,round,msgs_sent,blocks_sent\n";
    for (const TrafficRow& row : traffic)
        out << row.node << ',' << row.round << ',' << row.msgs_sent << ',' << row.blocks_sent
            << '\n';
    return out.str();
}

long LocalityCertificate::blocks_in_round(int round) const {
    long total = 0;
    for (const TrafficRow& row : traffic)
        if (row.round == round) total += row.blocks_sent;
    return total;
}

int edge_owner(const Graph& g, int edge_index) { return g.edge(edge_index).lo; }

std::vector<int> edge_ownership(const Graph& g) {
    std::vector<int> owners(static_cast<std::size_t>(g.edge_count()));
    for (int l = 0; l < g.edge_count(); ++l) owners[static_cast<std::size_t>(l)] = edge_owner(g, l);
    return owners;
}

DecentralizedResult run_decentralized(Algorithm algorithm, const Graph& g,
                                      const std::vector<Eigen::MatrixXd>& node_scores,
                                      const SolverConfig& config) {
    config.validate();
    if (static_cast<int>(node_scores.size()) != g.node_count())
        throw std::invalid_argument("run_decentralized: one score block per node required");
    for (const auto& block : node_scores)
        if (block.cols() != node_scores.front().cols())
            throw std::invalid_argument("run_decentralized: score block dimension mismatch");
    return algorithm == Algorithm::pcm ? run_pcm_decentralized(g, node_scores, config)
                                       : run_maom_decentralized(g, node_scores, config);
}

DecentralizedResult run_decentralized(Algorithm algorithm, const Graph& g,
                                      const std::vector<Eigen::MatrixXd>& node_data,
                                      const EstimatingFunction& ef, const Eigen::VectorXd& theta,
                                      const SolverConfig& config) {
    return run_decentralized(algorithm, g, score_matrices(node_data, ef, theta), config);
}

}  // namespace nel
