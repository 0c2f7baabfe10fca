#include "nel/csv.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace nel {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) {
        const auto begin = field.find_first_not_of(" \t\r");
        const auto end = field.find_last_not_of(" \t\r");
        fields.push_back(begin == std::string::npos ? std::string()
                                                    : field.substr(begin, end - begin + 1));
    }
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

}  // namespace

int CsvTable::column(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw std::invalid_argument("csv: no column named " + name);
    return static_cast<int>(it - header.begin());
}

CsvTable parse_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("csv: empty input");
    CsvTable table;
    table.header = split_line(line);
    const std::size_t width = table.header.size();
    if (width == 0) throw std::invalid_argument("csv: empty header");

    std::vector<double> data;
    Eigen::Index rows = 0;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::vector<std::string> fields = split_line(line);
        if (fields.size() != width)
            throw std::invalid_argument("csv: row with wrong field count: " + line);
        for (const std::string& f : fields) {
            std::size_t used = 0;
            double value = 0.0;
            try {
                value = std::stod(f, &used);
            } catch (const std::exception&) {
                throw std::invalid_argument("csv: non-numeric field: " + f);
            }
            if (used != f.size()) throw std::invalid_argument("csv: non-numeric field: " + f);
            data.push_back(value);
        }
        ++rows;
    }
    table.values.resize(rows, static_cast<Eigen::Index>(width));
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(width); ++j)
            table.values(i, j) = data[static_cast<std::size_t>(i * static_cast<Eigen::Index>(width) + j)];
    return table;
}

CsvTable read_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open csv file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_csv(buffer.str());
}

Eigen::MatrixXd build_regression_observations(const CsvTable& table, const std::string& response,
                                              const std::vector<std::string>& covariates) {
    const Eigen::Index n = table.values.rows();
    if (n < 2) throw std::invalid_argument("csv: need at least 2 rows");
    Eigen::MatrixXd obs(n, static_cast<Eigen::Index>(covariates.size()) + 2);
    obs.col(0) = table.values.col(table.column(response));
    obs.col(1).setOnes();
    for (std::size_t k = 0; k < covariates.size(); ++k) {
        Eigen::VectorXd col = table.values.col(table.column(covariates[k]));
        const double mean = col.mean();
        col.array() -= mean;
        const double sd = std::sqrt(col.squaredNorm() / static_cast<double>(n - 1));
        if (sd > 0.0) col /= sd;
        obs.col(static_cast<Eigen::Index>(k) + 2) = col;
    }
    return obs;
}

std::vector<Eigen::MatrixXd> split_rows(const Eigen::MatrixXd& pooled, int node_count, Rng& rng) {
    if (node_count < 1) throw std::invalid_argument("split_rows: node_count must be positive");
    const Eigen::Index n_per = pooled.rows() / node_count;
    if (n_per == 0) throw std::invalid_argument("split_rows: fewer rows than nodes");
    std::vector<Eigen::Index> order(static_cast<std::size_t>(pooled.rows()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    for (std::size_t i = order.size() - 1; i > 0; --i)
        std::swap(order[i], order[rng.below(i + 1)]);
    std::vector<Eigen::MatrixXd> blocks;
    blocks.reserve(static_cast<std::size_t>(node_count));
    Eigen::Index at = 0;
    for (int i = 0; i < node_count; ++i) {
        Eigen::MatrixXd block(n_per, pooled.cols());
        for (Eigen::Index j = 0; j < n_per; ++j)
            block.row(j) = pooled.row(order[static_cast<std::size_t>(at + j)]);
        at += n_per;
        blocks.push_back(std::move(block));
    }
    return blocks;
}

std::string format_double(double x) {
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.12g", x);
    return buffer;
}

}  // namespace nel
