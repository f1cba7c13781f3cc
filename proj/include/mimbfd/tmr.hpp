#pragma once

#include <cstdint>
#include <vector>

#include "mimbfd/gpr.hpp"
#include "mimbfd/graph.hpp"
#include "mimbfd/tape.hpp"

namespace mimbfd {

// Each node's neighbor list, split by train-split label: benign-labeled,
// fraud-labeled, everything else (unlabeled or val/test-labeled, which are
// deliberately treated as unlabeled to keep evaluation labels out of the
// message path).
struct NeighborPartition {
    struct Relation {
        IndexLists benign;
        IndexLists fraud;
        IndexLists unlabeled;
    };
    std::vector<Relation> relations;
};

NeighborPartition partition_neighbors(const MultiRelationGraph& g, const SplitAssignment& split);

// Propagation weights for one relation, taken from InfluenceScores.p columns
// (or uniform 1/n in the reachability-off ablation).
struct RelationWeights {
    std::vector<double> benign;
    std::vector<double> fraud;
};

std::vector<RelationWeights> extract_weights(const InfluenceScores& scores);
std::vector<RelationWeights> uniform_weights(NodeId n, std::size_t num_relations);

// One layer's trainable tensors, registered on a tape by the caller.
struct TmrLayerVars {
    Var w_self, b_self;  // d_in x d_in, 1 x d_in
    Var w_beta, b_beta;  // d_in x d_in, 1 x d_in
    Var w_fuse, b_fuse;  // 4*d_in x d_out, 1 x d_out
};

struct TmrForwardOpts {
    double leaky_slope = 0.01;
    bool frozen_gate = false;  // ablation: beta fixed at 0.5, gate untrained
};

// Weighted mean of the rows listed for each node; empty list -> zero row.
Var aggregate_class(Var h, const IndexLists& lists, const std::vector<double>& p_col);

// Per-dimension gate in (0,1) from the previous-layer representation.
Var beta_gate(Var h_prev, Var w_beta, Var b_beta);

// beta*h_fr + (1-beta)*h_be, elementwise.
Var fuse_unlabeled(Var h_un_be, Var h_un_fr, Var beta);

// Full layer: per relation concat[self-transform, benign agg, fraud agg,
// gated unlabeled agg], mean across relations, shared linear + activation.
Var tmr_forward(Var h_prev, const NeighborPartition& part,
                const std::vector<RelationWeights>& weights, const TmrLayerVars& vars,
                const TmrForwardOpts& opts = {});

}  // namespace mimbfd
