#ifndef NEL_EXPERIMENT_HPP
#define NEL_EXPERIMENT_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "nel/graph.hpp"
#include "nel/solver_config.hpp"

namespace nel {

/// One experiment definition: family, sizes, topology, tuning rules,
/// replication count, and the seed that makes the whole run reproducible.
struct ExperimentSpec {
    std::string family = "mean";
    int d = 0;  // 0 = family default
    int K = 20;
    int n = 200;
    std::string graph_model = "er";  // "er" or "tree"
    double p_g = 0.3;
    std::string rho_rule = "n";      // "<mult>n" or a plain number
    std::string eta_rule = "n2";     // "n2", "relaxed", or a plain number
    int replications = 300;
    std::vector<double> levels = {0.90, 0.95};
    std::uint64_t seed = 1;
    int threads = 0;  // 0 = hardware concurrency
    bool intervals = true;
    int max_iter = 5000;
};

double resolve_rho(const std::string& rule, int samples_per_node);
double resolve_eta(const std::string& rule, int node_count, int samples_per_node);
SolverConfig config_for(const ExperimentSpec& spec);

/// Graph for one replication: Erdos-Renyi, or its breadth-first spanning
/// tree under the "tree" model.
Graph make_graph(const std::string& model, int node_count, double p_g, std::uint64_t seed);

struct CoverageRow {
    std::string method;  // pcm | maom | el
    double level = 0.0;
    double coverage = 0.0;
    double mean_length = 0.0;  // NaN when not profiled
};
struct CoverageTable {
    std::vector<CoverageRow> rows;
    int replications_used = 0;
    int failures = 0;
    std::string csv() const;
};
/// Tests the true parameter across replications with PCM, MAOM and the
/// pooled reference; profiles scalar intervals when the family allows it.
CoverageTable experiment_coverage(const ExperimentSpec& spec);

struct IterationRow {
    std::string topology;
    int d = 0;
    int n = 0;
    std::string algo;
    double mean_iters = 0.0;
    double mean_time_s = 0.0;
};
struct IterationsTable {
    std::vector<IterationRow> rows;
    std::string csv() const;
};
/// Topology labels: "tree" or "er<p>" (e.g. "er0.3").
IterationsTable experiment_iterations(const ExperimentSpec& base,
                                      const std::vector<std::string>& topologies,
                                      const std::vector<std::pair<int, int>>& dn_grid);

struct RhoRow {
    double rho = 0.0;
    std::string algo;
    double mean_iters = 0.0;
};
struct RhoCurve {
    std::vector<RhoRow> rows;
    std::string csv() const;
};
RhoCurve experiment_rho_sweep(const ExperimentSpec& base, const std::vector<double>& multipliers);

/// Index-deterministic parallel loop used for replications.
void parallel_for(int count, int threads, const std::function<void(int)>& body);

}  // namespace nel

#endif
