#pragma once

// Allocation-free variants of the effective-neighbor estimators, used by the
// engine to refill the same NeighborSets every iteration.

#include <span>
#include <vector>

#include "mtdiff/network.hpp"

namespace mtdiff::detail {

void fill_by_labels(std::span<const std::size_t> labels, const Graph& graph, NeighborSets& out);
void fill_by_distance(std::span<const std::vector<double>> status, const Graph& graph, double delta,
                      NeighborSets& out);

}  // namespace mtdiff::detail
