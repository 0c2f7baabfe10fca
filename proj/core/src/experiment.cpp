#include "nel/experiment.hpp"

#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "nel/chisq.hpp"
#include "nel/csv.hpp"
#include "nel/datagen.hpp"
#include "nel/elcore.hpp"
#include "nel/maom.hpp"
#include "nel/pcm.hpp"
#include "nel/profile.hpp"

namespace nel {

namespace {

double parse_scaled(const std::string& rule, double unit, bool* scaled) {
    *scaled = !rule.empty() && rule.back() == 'n';
    std::string head = *scaled ? rule.substr(0, rule.size() - 1) : rule;
    if (*scaled && head.empty()) return unit;
    std::size_t used = 0;
    const double value = std::stod(head, &used);
    if (used != head.size()) throw std::invalid_argument("cannot parse rule: " + rule);
    return *scaled ? value * unit : value;
}

}  // namespace

double resolve_rho(const std::string& rule, int samples_per_node) {
    bool scaled = false;
    const double value = parse_scaled(rule, static_cast<double>(samples_per_node), &scaled);
    if (!(value > 0.0)) throw std::invalid_argument("rho rule must be positive: " + rule);
    return value;
}

double resolve_eta(const std::string& rule, int node_count, int samples_per_node) {
    if (rule == "n2") return eta_default(node_count, samples_per_node);
    if (rule == "relaxed") return eta_relaxed(node_count, samples_per_node);
    bool scaled = false;
    const double value = parse_scaled(rule, static_cast<double>(samples_per_node), &scaled);
    if (!(value > 0.0)) throw std::invalid_argument("eta rule must be positive: " + rule);
    return value;
}

SolverConfig config_for(const ExperimentSpec& spec) {
    SolverConfig cfg;
    cfg.rho = resolve_rho(spec.rho_rule, spec.n);
    cfg.eta = resolve_eta(spec.eta_rule, spec.K, spec.n);
    cfg.pseudo_log_eps = 1.0 / (static_cast<double>(spec.K) * spec.n);
    cfg.max_iter = spec.max_iter;
    return cfg;
}

Graph make_graph(const std::string& model, int node_count, double p_g, std::uint64_t seed) {
    if (model == "er") return gen_erdos_renyi(node_count, p_g, seed);
    // the canonical spanning-tree topology: breadth-first tree of the
    // complete graph, a depth-one tree rooted at node 1
    if (model == "tree") return spanning_tree(gen_erdos_renyi(node_count, 1.0, seed));
    throw std::invalid_argument("unknown graph model: " + model);
}

void parallel_for(int count, int threads, const std::function<void(int)>& body) {
    if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
    if (threads <= 1 || count <= 1) {
        for (int i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::mutex error_mutex;
    const int workers = std::min(threads, count);
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const int i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    body(i);
                } catch (...) {
                    std::scoped_lock lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct RepOutcome {
    bool ok = false;
    double stat_pcm = kNaN, stat_maom = kNaN, stat_el = kNaN;
    std::vector<double> lengths;  // [method][level] flattened; empty when not profiled
};

}  // namespace

std::string CoverageTable::csv() const {
    std::ostringstream out;
    out << "method,level,coverage,mean_length\n";
    for (const CoverageRow& row : rows) {
        out << row.method << ',' << format_double(row.level) << ',' << format_double(row.coverage)
            << ',';
        if (row.mean_length == row.mean_length) out << format_double(row.mean_length);
        out << '\n';
    }
    return out.str();
}

CoverageTable experiment_coverage(const ExperimentSpec& spec) {
    const FamilySpec family = make_family(spec.family, spec.d);
    const SolverConfig cfg = config_for(spec);
    const bool scalar = family.ef.param_dim == 1;
    const bool do_intervals = spec.intervals && scalar;
    const std::size_t n_levels = spec.levels.size();

    std::vector<RepOutcome> outcomes(static_cast<std::size_t>(spec.replications));
    parallel_for(spec.replications, spec.threads, [&](int rep) {
        RepOutcome& out = outcomes[static_cast<std::size_t>(rep)];
        try {
            Rng data_rng = Rng::substream(spec.seed, 2 * static_cast<std::uint64_t>(rep));
            const Graph g = make_graph(spec.graph_model, spec.K, spec.p_g,
                                       Rng::mix(spec.seed, 2 * static_cast<std::uint64_t>(rep) + 1));
            const std::vector<Eigen::MatrixXd> data =
                generate_node_data(family, spec.K, spec.n, data_rng);
            const std::vector<Eigen::MatrixXd> scores =
                score_matrices(data, family.ef, family.theta0);

            const Eigen::VectorXd lambda_star = solve_reference(scores, cfg.pseudo_log_eps);
            const std::vector<Eigen::VectorXd> consensus(scores.size(), lambda_star);
            out.stat_el = el_statistic(consensus, scores, cfg.pseudo_log_eps);
            out.stat_pcm = run_pcm(g, scores, cfg).second.final_statistic;
            out.stat_maom = run_maom(g, scores, cfg).second.final_statistic;

            if (do_intervals) {
                Eigen::Index total = 0;
                for (const auto& block : data) total += block.rows();
                Eigen::MatrixXd pooled(total, family.ef.obs_dim);
                Eigen::Index at = 0;
                for (const auto& block : data) {
                    pooled.middleRows(at, block.rows()) = block;
                    at += block.rows();
                }
                const Eigen::VectorXd center = family.point_estimate(pooled);
                out.lengths.assign(3 * n_levels, kNaN);
                const SolverKind kinds[3] = {SolverKind::pcm, SolverKind::maom,
                                             SolverKind::reference};
                for (int m = 0; m < 3; ++m)
                    for (std::size_t lv = 0; lv < n_levels; ++lv) {
                        const ProfileInterval pi = profile_interval(
                            g, data, family.ef, center, 0, spec.levels[lv], kinds[m], cfg);
                        if (pi.bracketed())
                            out.lengths[static_cast<std::size_t>(m) * n_levels + lv] = pi.length();
                    }
            }
            out.ok = true;
        } catch (const std::exception&) {
            out.ok = false;
        }
    });

    CoverageTable table;
    const char* names[3] = {"pcm", "maom", "el"};
    for (int m = 0; m < 3; ++m) {
        for (std::size_t lv = 0; lv < n_levels; ++lv) {
            const double level = spec.levels[lv];
            const double threshold = chisq_quantile(family.ef.eq_dim, level);
            long used = 0, accepted = 0, len_count = 0;
            double len_sum = 0.0;
            for (const RepOutcome& out : outcomes) {
                if (!out.ok) continue;
                ++used;
                const double stat = m == 0 ? out.stat_pcm : (m == 1 ? out.stat_maom : out.stat_el);
                if (stat <= threshold) ++accepted;
                if (!out.lengths.empty()) {
                    const double len = out.lengths[static_cast<std::size_t>(m) * n_levels + lv];
                    if (len == len) {
                        len_sum += len;
                        ++len_count;
                    }
                }
            }
            CoverageRow row;
            row.method = names[m];
            row.level = level;
            row.coverage = used > 0 ? static_cast<double>(accepted) / static_cast<double>(used) : kNaN;
            row.mean_length = len_count > 0 ? len_sum / static_cast<double>(len_count) : kNaN;
            table.rows.push_back(row);
            table.replications_used = static_cast<int>(used);
        }
    }
    table.failures = spec.replications - table.replications_used;
    return table;
}

std::string IterationsTable::csv() const {
    std::ostringstream out;
    out << "topology,d,n,algo,mean_iters,mean_time_s\n";
    for (const IterationRow& row : rows)
        out << row.topology << ',' << row.d << ',' << row.n << ',' << row.algo << ','
            << format_double(row.mean_iters) << ',' << format_double(row.mean_time_s) << '\n';
    return out.str();
}

namespace {

struct TopologySpec {
    std::string model;
    double p_g = 0.3;
};

TopologySpec parse_topology(const std::string& label) {
    if (label == "tree") return {"tree", 0.3};
    if (label.rfind("er", 0) == 0) {
        const std::string tail = label.substr(2);
        return {"er", tail.empty() ? 0.3 : std::stod(tail)};
    }
    throw std::invalid_argument("unknown topology label: " + label);
}

}  // namespace

IterationsTable experiment_iterations(const ExperimentSpec& base,
                                      const std::vector<std::string>& topologies,
                                      const std::vector<std::pair<int, int>>& dn_grid) {
    IterationsTable table;
    std::uint64_t cell = 0;
    for (const auto& [d, n] : dn_grid) {
        for (const std::string& label : topologies) {
            const TopologySpec topo = parse_topology(label);
            ExperimentSpec spec = base;
            spec.family = "mean";
            spec.d = d;
            spec.n = n;
            spec.graph_model = topo.model;
            spec.p_g = topo.p_g;
            const FamilySpec family = make_family(spec.family, spec.d);
            const SolverConfig cfg = config_for(spec);

            std::vector<double> pcm_iters(static_cast<std::size_t>(spec.replications)),
                pcm_time(static_cast<std::size_t>(spec.replications)),
                maom_iters(static_cast<std::size_t>(spec.replications)),
                maom_time(static_cast<std::size_t>(spec.replications));
            const std::uint64_t cell_seed = Rng::mix(base.seed, 1000 + cell);
            parallel_for(spec.replications, spec.threads, [&](int rep) {
                Rng data_rng = Rng::substream(cell_seed, 2 * static_cast<std::uint64_t>(rep));
                const Graph g =
                    make_graph(spec.graph_model, spec.K, spec.p_g,
                               Rng::mix(cell_seed, 2 * static_cast<std::uint64_t>(rep) + 1));
                const std::vector<Eigen::MatrixXd> data =
                    generate_node_data(family, spec.K, spec.n, data_rng);
                const std::vector<Eigen::MatrixXd> scores =
                    score_matrices(data, family.ef, family.theta0);
                const auto [ps, pr] = run_pcm(g, scores, cfg);
                const auto [ms, mr] = run_maom(g, scores, cfg);
                pcm_iters[static_cast<std::size_t>(rep)] = pr.iterations;
                pcm_time[static_cast<std::size_t>(rep)] = pr.wall_seconds;
                maom_iters[static_cast<std::size_t>(rep)] = mr.iterations;
                maom_time[static_cast<std::size_t>(rep)] = mr.wall_seconds;
            });
            const auto mean = [](const std::vector<double>& xs) {
                double s = 0.0;
                for (double x : xs) s += x;
                return s / static_cast<double>(xs.size());
            };
            table.rows.push_back({label, d, n, "pcm", mean(pcm_iters), mean(pcm_time)});
            table.rows.push_back({label, d, n, "maom", mean(maom_iters), mean(maom_time)});
            ++cell;
        }
    }
    return table;
}

std::string RhoCurve::csv() const {
    std::ostringstream out;
    out << "rho,algo,mean_iters\n";
    for (const RhoRow& row : rows)
        out << format_double(row.rho) << ',' << row.algo << ',' << format_double(row.mean_iters)
            << '\n';
    return out.str();
}

RhoCurve experiment_rho_sweep(const ExperimentSpec& base, const std::vector<double>& multipliers) {
    RhoCurve curve;
    const FamilySpec family = make_family(base.family, base.d);
    for (std::size_t m = 0; m < multipliers.size(); ++m) {
        ExperimentSpec spec = base;
        const double rho = multipliers[m] * static_cast<double>(spec.n);
        SolverConfig cfg = config_for(spec);
        cfg.rho = rho;

        std::vector<double> pcm_iters(static_cast<std::size_t>(spec.replications)),
            maom_iters(static_cast<std::size_t>(spec.replications));
        parallel_for(spec.replications, spec.threads, [&](int rep) {
            Rng data_rng = Rng::substream(spec.seed, 2 * static_cast<std::uint64_t>(rep));
            const Graph g = make_graph(spec.graph_model, spec.K, spec.p_g,
                                       Rng::mix(spec.seed, 2 * static_cast<std::uint64_t>(rep) + 1));
            const std::vector<Eigen::MatrixXd> data =
                generate_node_data(family, spec.K, spec.n, data_rng);
            const std::vector<Eigen::MatrixXd> scores =
                score_matrices(data, family.ef, family.theta0);
            pcm_iters[static_cast<std::size_t>(rep)] = run_pcm(g, scores, cfg).second.iterations;
            maom_iters[static_cast<std::size_t>(rep)] = run_maom(g, scores, cfg).second.iterations;
        });
        const auto mean = [](const std::vector<double>& xs) {
            double s = 0.0;
            for (double x : xs) s += x;
            return s / static_cast<double>(xs.size());
        };
        curve.rows.push_back({rho, "pcm", mean(pcm_iters)});
        curve.rows.push_back({rho, "maom", mean(maom_iters)});
    }
    return curve;
}

}  // namespace nel
