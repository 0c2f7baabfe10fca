#ifndef NEL_RUN_REPORT_HPP
#define NEL_RUN_REPORT_HPP

#include <Eigen/Dense>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

namespace nel {

struct IterStats {
    int iter = 0;
    double r_norm = 0.0;
    double s_norm = 0.0;
    double consensus_gap = 0.0;
    double statistic = std::numeric_limits<double>::quiet_NaN();
};

struct RunReport {
    std::vector<IterStats> trace;
    int iterations = 0;
    bool converged = false;
    double wall_seconds = 0.0;
    double final_statistic = std::numeric_limits<double>::quiet_NaN();
    double final_consensus_gap = 0.0;
    /// Textbook ADMM dual residual rho * A'(aux^{(t)} - aux^{(t-1)}), kept as
    /// a diagnostic alongside the dual residual used for stopping.
    double alt_dual_residual = 0.0;
    std::vector<std::vector<Eigen::VectorXd>> lambda_history;

    std::string csv() const {
        std::ostringstream out;
        out << "iter,r_norm,s_norm,consensus_gap,statistic\n";
        out.precision(12);
        for (const IterStats& row : trace) {
            out << row.iter << ',' << row.r_norm << ',' << row.s_norm << ','
                << row.consensus_gap << ',';
            if (row.statistic == row.statistic) out << row.statistic;
            out << '\n';
        }
        return out.str();
    }
};

}  // namespace nel

#endif
