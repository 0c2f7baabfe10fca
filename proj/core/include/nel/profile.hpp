#ifndef NEL_PROFILE_HPP
#define NEL_PROFILE_HPP

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "nel/estfun.hpp"
#include "nel/graph.hpp"
#include "nel/solver_config.hpp"

namespace nel {

enum class SolverKind { reference, pcm, maom };

/// Statistic for testing theta on the given data, evaluated with the chosen
/// multiplier solver.
double statistic_at(const Graph& g, const std::vector<Eigen::MatrixXd>& node_data,
                    const EstimatingFunction& ef, const Eigen::VectorXd& theta, SolverKind solver,
                    const SolverConfig& config);

struct ProfileOptions {
    double initial_step = 0.0;  // 0 picks 0.02 * (1 + |center|)
    int max_expansions = 60;
    double xtol = 0.0;  // 0 picks 1e-6 * (1 + |center|)
};

struct ProfileInterval {
    double lo = 0.0;
    double hi = 0.0;
    bool lo_bracketed = false;
    bool hi_bracketed = false;
    double threshold = 0.0;
    double statistic_at_center = 0.0;
    double length() const { return hi - lo; }
    bool bracketed() const { return lo_bracketed && hi_bracketed; }
};

/// Endpoints where `statistic` crosses `threshold`, found by expanding
/// brackets outward from `center` and bisecting. Failure to bracket within
/// the scan range is reported through the flags, not thrown.
ProfileInterval profile_interval(const std::function<double(double)>& statistic, double center,
                                 double threshold, const ProfileOptions& options = {});

/// Profile confidence interval for one parameter component; the other
/// components stay fixed at `at`. Scalar profiling only.
ProfileInterval profile_interval(const Graph& g, const std::vector<Eigen::MatrixXd>& node_data,
                                 const EstimatingFunction& ef, const Eigen::VectorXd& at,
                                 int component, double level, SolverKind solver,
                                 const SolverConfig& config, const ProfileOptions& options = {});

}  // namespace nel

#endif
