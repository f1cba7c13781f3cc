#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "mimbfd/graph.hpp"
#include "mimbfd/tensor.hpp"

namespace mimbfd {

struct GprConfig {
    double alpha = 0.15;        // restart probability, (0, 1]
    double tol = 1e-10;         // sup-norm residual target
    std::int64_t max_iters = 0; // 0 -> contraction-rate bound, 10*ceil(ln tol / ln(1-alpha))

    void validate() const;
    std::int64_t effective_max_iters() const;
};

// Per-relation class influence: column 0 = benign, column 1 = fraud.
struct RelationInfluence {
    Tensor g;  // n x 2, raw propagation scores
    Tensor p;  // n x 2, column-softmax of g
    std::array<std::int64_t, 2> converged_iters{0, 0};
    // L1 step residual per iteration, for convergence diagnostics.
    std::array<std::vector<double>, 2> residual_log;
};

struct InfluenceScores {
    std::vector<RelationInfluence> relations;
};

// Restart distribution for one class: 1/|train-labeled of class| on those
// nodes, 0 elsewhere. Never reads val/test labels.
std::vector<double> teleport_vector(const MultiRelationGraph& g, const SplitAssignment& split,
                                    int class_id);

// Both class teleports stacked as columns of an n x 2 tensor.
Tensor teleport_matrix(const MultiRelationGraph& g, const SplitAssignment& split);

// Power iteration for the restart fixed point g = (1-alpha) T g + alpha I,
// one class per teleport column. Sequential and deterministic. The returned
// fixed-point residual is below cfg.tol in sup norm for every column.
Tensor compute_gpr(const TransitionMatrix& transition, const Tensor& teleports,
                   const GprConfig& cfg, std::array<std::int64_t, 2>* iters_out = nullptr,
                   std::array<std::vector<double>, 2>* residual_log = nullptr);

// Direct dense solve of (E - (1-alpha) T) g = alpha * I per column.
// Reference route for testing; requires n <= 200.
Tensor dense_gpr_oracle(const RelationAdjacency& adj, const Tensor& teleports, double alpha);

// Column-wise softmax over all n nodes; order-preserving per column.
Tensor normalize_scores(const Tensor& g);

// Full pipeline across relations: teleports from train labels, frozen before
// any training step.
InfluenceScores compute_influence(const MultiRelationGraph& g, const SplitAssignment& split,
                                  const GprConfig& cfg);

}  // namespace mimbfd
