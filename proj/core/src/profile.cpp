#include "nel/profile.hpp"

#include <cmath>
#include <stdexcept>

#include "nel/chisq.hpp"
#include "nel/elcore.hpp"
#include "nel/maom.hpp"
#include "nel/pcm.hpp"

namespace nel {

double statistic_at(const Graph& g, const std::vector<Eigen::MatrixXd>& node_data,
                    const EstimatingFunction& ef, const Eigen::VectorXd& theta, SolverKind solver,
                    const SolverConfig& config) {
    const std::vector<Eigen::MatrixXd> scores = score_matrices(node_data, ef, theta);
    switch (solver) {
        case SolverKind::reference: {
            const Eigen::VectorXd lambda = solve_reference(scores, config.pseudo_log_eps);
            std::vector<Eigen::VectorXd> consensus(scores.size(), lambda);
            return el_statistic(consensus, scores, config.pseudo_log_eps);
        }
        case SolverKind::pcm:
            return run_pcm(g, scores, config).second.final_statistic;
        case SolverKind::maom:
            return run_maom(g, scores, config).second.final_statistic;
    }
    throw std::logic_error("statistic_at: unknown solver");
}

namespace {

double find_crossing(const std::function<double(double)>& statistic, double center,
                     double threshold, double step, int max_expansions, double xtol,
                     int direction, bool* bracketed) {
    double inside = center;
    double outside = center;
    *bracketed = false;
    double width = step;
    for (int k = 0; k < max_expansions; ++k) {
        outside = center + direction * width;
        if (statistic(outside) > threshold) {
            *bracketed = true;
            break;
        }
        inside = outside;
        width *= 2.0;
    }
    if (!*bracketed) return outside;
    while (std::abs(outside - inside) > xtol) {
        const double mid = 0.5 * (inside + outside);
        if (statistic(mid) > threshold) {
            outside = mid;
        } else {
            inside = mid;
        }
    }
    return 0.5 * (inside + outside);
}

}  // namespace

ProfileInterval profile_interval(const std::function<double(double)>& statistic, double center,
                                 double threshold, const ProfileOptions& options) {
    ProfileInterval out;
    out.threshold = threshold;
    out.statistic_at_center = statistic(center);
    const double step =
        options.initial_step > 0.0 ? options.initial_step : 0.02 * (1.0 + std::abs(center));
    const double xtol = options.xtol > 0.0 ? options.xtol : 1e-6 * (1.0 + std::abs(center));
    if (out.statistic_at_center > threshold) {
        // the profile has no sublevel set around this center
        out.lo = out.hi = center;
        return out;
    }
    out.lo = find_crossing(statistic, center, threshold, step, options.max_expansions, xtol, -1,
                           &out.lo_bracketed);
    out.hi = find_crossing(statistic, center, threshold, step, options.max_expansions, xtol, +1,
                           &out.hi_bracketed);
    return out;
}

ProfileInterval profile_interval(const Graph& g, const std::vector<Eigen::MatrixXd>& node_data,
                                 const EstimatingFunction& ef, const Eigen::VectorXd& at,
                                 int component, double level, SolverKind solver,
                                 const SolverConfig& config, const ProfileOptions& options) {
    if (component < 0 || component >= ef.param_dim)
        throw std::invalid_argument("profile_interval: component out of range");
    const double threshold = chisq_quantile(1, level);
    Eigen::VectorXd theta = at;
    const auto statistic = [&](double x) {
        theta(component) = x;
        return statistic_at(g, node_data, ef, theta, solver, config);
    };
    return profile_interval(statistic, at(component), threshold, options);
}

}  // namespace nel
