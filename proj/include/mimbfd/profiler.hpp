#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "mimbfd/graph.hpp"

namespace mimbfd {

// Per-bin neighborhood composition of labeled-benign nodes, binned by a
// centrality value. Bins are equal-width over the observed range.
struct CentralityProfile {
    std::vector<double> bin_lo, bin_hi;
    std::vector<std::int64_t> count_benign;
    std::vector<double> mean_fraud_neighbors;
    std::vector<double> mean_benign_neighbors;
};

// Component-local closeness: (reachable-1) / sum of BFS distances to the
// reachable nodes; isolated nodes score 0.
std::vector<double> closeness_centrality(const RelationAdjacency& adj);

// degree / (n-1); requires n >= 2.
std::vector<double> degree_centrality(const RelationAdjacency& adj);

CentralityProfile neighbor_composition_histogram(const MultiRelationGraph& g,
                                                 const RelationAdjacency& adj,
                                                 const std::vector<double>& centrality,
                                                 int num_bins);

void write_profile_csv(const std::filesystem::path& file, const CentralityProfile& profile);

}  // namespace mimbfd
