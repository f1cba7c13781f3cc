#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mimbfd/tensor.hpp"

namespace mimbfd {

using NodeId = std::int64_t;

// Labels: 0 benign, 1 fraud, -1 unknown.
constexpr int kBenign = 0;
constexpr int kFraud = 1;
constexpr int kUnlabeled = -1;

// One relation's adjacency in CSR form. Construction symmetrizes, drops
// self-loops, and dedupes; rows end up sorted and unique.
struct RelationAdjacency {
    std::vector<std::int64_t> offsets;  // n+1, monotone, back() == nnz
    std::vector<NodeId> indices;        // sorted, unique per row
    std::vector<std::int64_t> degree;   // row lengths

    NodeId num_nodes() const { return static_cast<NodeId>(degree.size()); }
    std::int64_t nnz() const { return static_cast<std::int64_t>(indices.size()); }

    const NodeId* row_begin(NodeId i) const { return indices.data() + offsets[i]; }
    const NodeId* row_end(NodeId i) const { return indices.data() + offsets[i + 1]; }

    bool has_edge(NodeId i, NodeId j) const;

    static RelationAdjacency from_edges(NodeId n,
                                        const std::vector<std::pair<NodeId, NodeId>>& edges);
    void validate() const;
};

struct MultiRelationGraph {
    NodeId num_nodes = 0;
    Tensor features;  // n x d
    std::vector<RelationAdjacency> relations;
    std::vector<int> labels;  // 0 / 1 / -1
    std::vector<std::string> relation_names;

    std::int64_t feature_dim() const { return features.cols; }
    std::int64_t count_label(int label) const;
    void validate() const;

    // All relations merged into one deduped adjacency.
    RelationAdjacency relation_union() const;
};

enum class SplitTag : std::int8_t { train = 0, val = 1, test = 2, unlabeled = 3 };

struct SplitAssignment {
    std::vector<SplitTag> tag;  // size n

    std::vector<NodeId> nodes_with(SplitTag t) const;
    std::vector<NodeId> train_nodes() const { return nodes_with(SplitTag::train); }
};

struct ResampleSpec {
    std::int64_t rho = 5;  // benign : fraud target among labeled nodes
    std::uint64_t seed = 0;
};

// Column-stochastic random-walk transition A D^-1 over one relation.
// Columns of zero-degree (dangling) nodes are all-zero.
struct TransitionMatrix {
    RelationAdjacency adj;
    std::vector<double> inv_degree;  // 1/deg, 0 for dangling nodes
    std::vector<NodeId> dangling;

    NodeId num_nodes() const { return adj.num_nodes(); }

    // y = (A D^-1) x, sequential and deterministic.
    void apply(const std::vector<double>& x, std::vector<double>& y) const;
};

TransitionMatrix transition_matrix(const RelationAdjacency& adj);

// Directory layout: graph_meta.json, nodes.tsv, edges_<relation>.tsv.
MultiRelationGraph load_graph(const std::filesystem::path& dir);
void save_graph(const MultiRelationGraph& g, const std::filesystem::path& dir);

// Stratified per class; deterministic for a fixed seed. ratios are
// normalized to sum 1; each class is apportioned by largest remainder.
SplitAssignment stratified_split(const MultiRelationGraph& g, double train_ratio,
                                 double val_ratio, double test_ratio, std::uint64_t seed);

// Masks labels (never edges or features) until the labeled set has
// benign:fraud == rho:1, subsampling whichever side is oversized.
MultiRelationGraph resample_imbalance(const MultiRelationGraph& g, const ResampleSpec& spec);

}  // namespace mimbfd
