#pragma once

#include <string>
#include <utility>
#include <vector>

#include "mimbfd/config.hpp"
#include "mimbfd/graph.hpp"
#include "mimbfd/lcd.hpp"
#include "mimbfd/tmr.hpp"

namespace mimbfd {

struct TmrLayerParams {
    Tensor w_self, b_self;
    Tensor w_beta, b_beta;
    Tensor w_fuse, b_fuse;
};

// The trained network plus the frozen inputs it was wired against: split,
// influence weights and neighbor partition never change after construction.
struct TmrModel {
    ExperimentConfig cfg;
    std::vector<TmrLayerParams> layers;
    Tensor w_cls, b_cls;  // linear classifier on the last hidden layer
    LcdState lcd;

    SplitAssignment split;
    InfluenceScores scores;
    NeighborPartition partition;
    std::vector<RelationWeights> weights;
    std::vector<std::int64_t> train_nodes, val_nodes, test_nodes;
};

// Mean-aggregation reference network on the relation union (with self-loops).
struct GcnModel {
    ExperimentConfig cfg;
    std::vector<std::pair<Tensor, Tensor>> layers;  // (weight, bias) per layer
    Tensor w_cls, b_cls;

    SplitAssignment split;
    IndexLists neighbor_lists;  // union adjacency incl. self edges
    std::vector<double> ones;
    std::vector<std::int64_t> train_nodes, val_nodes, test_nodes;
};

TmrModel init_tmr_model(const MultiRelationGraph& g, const ExperimentConfig& cfg);
GcnModel init_gcn_model(const MultiRelationGraph& g, const ExperimentConfig& cfg);

// Per-tape binding: leaves for every trainable tensor plus the forward graph.
struct BoundForward {
    std::vector<Var> param_vars;  // aligned with named_params() order
    Var logits;                   // n x 2
    Var h_last;                   // n x d_last
    Var lcd_u, lcd_gamma;         // only meaningful for TmrModel
};

std::vector<std::pair<std::string, Tensor*>> named_params(TmrModel& m);
std::vector<std::pair<std::string, Tensor*>> named_params(GcnModel& m);

BoundForward bind_forward(TmrModel& m, Tape& tape, const Tensor& features);
BoundForward bind_forward(GcnModel& m, Tape& tape, const Tensor& features);

}  // namespace mimbfd
