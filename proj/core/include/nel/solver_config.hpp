#ifndef NEL_SOLVER_CONFIG_HPP
#define NEL_SOLVER_CONFIG_HPP

#include <cmath>
#include <stdexcept>

namespace nel {

/// Shared knobs for both consensus solvers.
struct SolverConfig {
    double rho = 1.0;             // augmented-Lagrangian weight, recommended n
    double eta = 1.0;             // fusion weight eta_n
    double eps_abs = 1e-10;       // absolute part of the stopping tolerances
    double eps_rel = 1e-7;        // relative part
    int max_iter = 5000;
    double newton_tol = 1e-10;    // inner Newton: scaled by (1 + rho * degree)
    int newton_max_iter = 50;
    double pseudo_log_eps = 1e-3;
    bool trace_statistic = false;        // add the statistic to each trace row
    bool record_lambda_history = false;  // keep per-iteration multiplier snapshots

    void validate() const {
        if (!(rho > 0.0)) throw std::invalid_argument("SolverConfig: rho must be positive");
        if (!(eta > 0.0)) throw std::invalid_argument("SolverConfig: eta must be positive");
        if (!(eps_abs > 0.0) || !(eps_rel > 0.0))
            throw std::invalid_argument("SolverConfig: tolerances must be positive");
        if (max_iter < 1) throw std::invalid_argument("SolverConfig: max_iter must be positive");
        if (!(pseudo_log_eps > 0.0))
            throw std::invalid_argument("SolverConfig: pseudo_log_eps must be positive");
    }
};

/// eta_n = N^2. Keeps the fusion term dominant for any fixed sample size.
inline double eta_default(int node_count, int samples_per_node) {
    const double total = static_cast<double>(node_count) * samples_per_node;
    return total * total;
}

/// Relaxed preset K sqrt(n log K) log n, for parameters near the truth.
inline double eta_relaxed(int node_count, int samples_per_node) {
    const double k = static_cast<double>(node_count);
    const double n = static_cast<double>(samples_per_node);
    return k * std::sqrt(n * std::log(k)) * std::log(n);
}

/// rho = n, eta = N^2, pseudo-log eps = 1/N.
inline SolverConfig default_config(int node_count, int samples_per_node) {
    SolverConfig cfg;
    cfg.rho = static_cast<double>(samples_per_node);
    cfg.eta = eta_default(node_count, samples_per_node);
    cfg.pseudo_log_eps = 1.0 / (static_cast<double>(node_count) * samples_per_node);
    return cfg;
}

}  // namespace nel

#endif
