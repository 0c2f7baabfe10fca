#ifndef NEL_CSV_HPP
#define NEL_CSV_HPP

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "nel/rng.hpp"

namespace nel {

/// Numeric CSV with a header row.
struct CsvTable {
    std::vector<std::string> header;
    Eigen::MatrixXd values;

    int column(const std::string& name) const;  // throws when absent
};

CsvTable parse_csv(const std::string& text);
CsvTable read_csv_file(const std::string& path);

/// Observation matrix for the regression families: column 0 is the
/// response, column 1 a constant intercept, then the requested covariates
/// standardized to zero mean and unit variance.
Eigen::MatrixXd build_regression_observations(const CsvTable& table, const std::string& response,
                                              const std::vector<std::string>& covariates);

/// Random equal split: rows are shuffled with the given source and divided
/// into `node_count` blocks of floor(N / node_count); the remainder is
/// dropped.
std::vector<Eigen::MatrixXd> split_rows(const Eigen::MatrixXd& pooled, int node_count, Rng& rng);

std::string format_double(double x);

}  // namespace nel

#endif
