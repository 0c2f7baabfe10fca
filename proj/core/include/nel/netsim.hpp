#ifndef NEL_NETSIM_HPP
#define NEL_NETSIM_HPP

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "nel/estfun.hpp"
#include "nel/graph.hpp"
#include "nel/maom.hpp"
#include "nel/pcm.hpp"
#include "nel/run_report.hpp"
#include "nel/solver_config.hpp"

namespace nel {

enum class Algorithm { pcm, maom };

enum class PayloadKind { lambda_share, edge_var_share, dual_share };

/// One neighbor-to-neighbor message; payload blocks are r-vectors.
struct Message {
    int sender = -1;
    int receiver = -1;
    int round = 0;
    PayloadKind kind = PayloadKind::lambda_share;
    int edge = -1;  // -1 for broadcasts
    std::vector<Eigen::VectorXd> blocks;
};

/// Audit of a decentralized run: per-round traffic tallies plus any
/// locality faults (sends that do not follow a graph edge). A clean run
/// has an empty violation list.
struct LocalityCertificate {
    struct TrafficRow {
        int round = 0;
        int node = 0;
        int msgs_sent = 0;
        int blocks_sent = 0;
    };
    struct PairCount {
        int from = 0;
        int to = 0;
        long msgs = 0;
    };
    std::vector<TrafficRow> traffic;
    std::vector<PairCount> pair_messages;
    std::vector<std::string> violations;
    long total_messages = 0;
    long total_blocks = 0;

    bool clean() const { return violations.empty(); }
    std::string csv() const;
    /// Sum of blocks sent in a given round across nodes.
    long blocks_in_round(int round) const;
};

/// Edge owner: the lower-index endpoint. Every edge has exactly one owner.
int edge_owner(const Graph& g, int edge_index);
std::vector<int> edge_ownership(const Graph& g);

struct DecentralizedResult {
    Algorithm algorithm = Algorithm::pcm;
    std::vector<Eigen::VectorXd> lambda;
    PCMState pcm_state;    // populated for Algorithm::pcm
    MAOMState maom_state;  // populated for Algorithm::maom
    RunReport report;
    LocalityCertificate certificate;
};

/// Runs the chosen solver as node actors on a virtual network. Nodes read
/// only their own state and messages from neighbors; the resulting
/// trajectories are bit-identical to the monolithic runners. Stopping is
/// decided by an omniscient observer evaluating the same residual
/// criteria (flagged observer-only; the actors never see global norms).
DecentralizedResult run_decentralized(Algorithm algorithm, const Graph& g,
                                      const std::vector<Eigen::MatrixXd>& node_scores,
                                      const SolverConfig& config);
DecentralizedResult run_decentralized(Algorithm algorithm, const Graph& g,
                                      const std::vector<Eigen::MatrixXd>& node_data,
                                      const EstimatingFunction& ef, const Eigen::VectorXd& theta,
                                      const SolverConfig& config);

}  // namespace nel

#endif
