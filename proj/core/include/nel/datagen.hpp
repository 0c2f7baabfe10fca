#ifndef NEL_DATAGEN_HPP
#define NEL_DATAGEN_HPP

#include <Eigen/Dense>
#include <vector>

#include "nel/estfun.hpp"
#include "nel/rng.hpp"

namespace nel {

/// Draws K*n observations from the family's generator at the true
/// parameter, then distributes them to the nodes randomly in equal blocks
/// of n. Deterministic given the rng state.
std::vector<Eigen::MatrixXd> generate_node_data(const FamilySpec& family, int node_count,
                                                int samples_per_node, Rng& rng);

}  // namespace nel

#endif
