#include "nel/datagen.hpp"

#include <stdexcept>

#include "nel/csv.hpp"

namespace nel {

std::vector<Eigen::MatrixXd> generate_node_data(const FamilySpec& family, int node_count,
                                                int samples_per_node, Rng& rng) {
    if (node_count < 1 || samples_per_node < 1)
        throw std::invalid_argument("generate_node_data: counts must be positive");
    const Eigen::Index total =
        static_cast<Eigen::Index>(node_count) * static_cast<Eigen::Index>(samples_per_node);
    Eigen::MatrixXd pooled(total, family.ef.obs_dim);
    for (Eigen::Index j = 0; j < total; ++j) pooled.row(j) = family.sample(rng).transpose();
    return split_rows(pooled, node_count, rng);
}

}  // namespace nel
