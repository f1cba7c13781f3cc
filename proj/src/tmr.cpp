#include "mimbfd/tmr.hpp"

#include <string>

namespace mimbfd {

NeighborPartition partition_neighbors(const MultiRelationGraph& g,
                                      const SplitAssignment& split) {
    if (split.tag.size() != static_cast<std::size_t>(g.num_nodes))
        throw ShapeError("partition_neighbors: split size mismatch");
    NeighborPartition part;
    part.relations.resize(g.relations.size());
    for (std::size_t r = 0; r < g.relations.size(); ++r) {
        const auto& adj = g.relations[r];
        auto& p = part.relations[r];
        for (IndexLists* lists : {&p.benign, &p.fraud, &p.unlabeled})
            lists->offsets.assign(1, 0);
        for (NodeId i = 0; i < g.num_nodes; ++i) {
            for (const NodeId* nb = adj.row_begin(i); nb != adj.row_end(i); ++nb) {
                const NodeId j = *nb;
                const bool train = split.tag[static_cast<std::size_t>(j)] == SplitTag::train;
                if (train && g.labels[static_cast<std::size_t>(j)] == kBenign)
                    p.benign.indices.push_back(j);
                else if (train && g.labels[static_cast<std::size_t>(j)] == kFraud)
                    p.fraud.indices.push_back(j);
                else
                    p.unlabeled.indices.push_back(j);
            }
            for (IndexLists* lists : {&p.benign, &p.fraud, &p.unlabeled})
                lists->offsets.push_back(static_cast<std::int64_t>(lists->indices.size()));
        }
    }
    return part;
}

std::vector<RelationWeights> extract_weights(const InfluenceScores& scores) {
    std::vector<RelationWeights> out;
    out.reserve(scores.relations.size());
    for (const auto& ri : scores.relations) {
        RelationWeights w;
        w.benign.resize(static_cast<std::size_t>(ri.p.rows));
        w.fraud.resize(static_cast<std::size_t>(ri.p.rows));
        for (std::int64_t i = 0; i < ri.p.rows; ++i) {
            w.benign[static_cast<std::size_t>(i)] = ri.p.at(i, 0);
            w.fraud[static_cast<std::size_t>(i)] = ri.p.at(i, 1);
        }
        out.push_back(std::move(w));
    }
    return out;
}

std::vector<RelationWeights> uniform_weights(NodeId n, std::size_t num_relations) {
    const double u = 1.0 / static_cast<double>(n);
    RelationWeights w;
    w.benign.assign(static_cast<std::size_t>(n), u);
    w.fraud.assign(static_cast<std::size_t>(n), u);
    return std::vector<RelationWeights>(num_relations, w);
}

Var aggregate_class(Var h, const IndexLists& lists, const std::vector<double>& p_col) {
    return scatter_weighted_mean(h, lists, p_col);
}

Var beta_gate(Var h_prev, Var w_beta, Var b_beta) {
    return sigmoid(add_row_broadcast(matmul(h_prev, w_beta), b_beta));
}

Var fuse_unlabeled(Var h_un_be, Var h_un_fr, Var beta) {
    Var one_minus = add_scalar(scale(beta, -1.0), 1.0);
    return add(mul(beta, h_un_fr), mul(one_minus, h_un_be));
}

Var tmr_forward(Var h_prev, const NeighborPartition& part,
                const std::vector<RelationWeights>& weights, const TmrLayerVars& vars,
                const TmrForwardOpts& opts) {
    if (part.relations.empty()) throw ShapeError("tmr_forward: no relations");
    if (part.relations.size() != weights.size())
        throw ShapeError("tmr_forward: " + std::to_string(part.relations.size()) +
                         " relations vs " + std::to_string(weights.size()) + " weight sets");

    Var self_t = leaky_relu(add_row_broadcast(matmul(h_prev, vars.w_self), vars.b_self),
                            opts.leaky_slope);
    Var beta{};
    if (!opts.frozen_gate) beta = beta_gate(h_prev, vars.w_beta, vars.b_beta);

    Var z_sum{};
    for (std::size_t r = 0; r < part.relations.size(); ++r) {
        const auto& p = part.relations[r];
        Var h_be = aggregate_class(h_prev, p.benign, weights[r].benign);
        Var h_fr = aggregate_class(h_prev, p.fraud, weights[r].fraud);
        Var h_un_be = aggregate_class(h_prev, p.unlabeled, weights[r].benign);
        Var h_un_fr = aggregate_class(h_prev, p.unlabeled, weights[r].fraud);
        Var h_un = opts.frozen_gate ? scale(add(h_un_fr, h_un_be), 0.5)
                                    : fuse_unlabeled(h_un_be, h_un_fr, beta);
        Var z = concat_cols({self_t, h_be, h_fr, h_un});
        z_sum = (r == 0) ? z : add(z_sum, z);
    }
    Var z_mean = part.relations.size() == 1
                     ? z_sum
                     : scale(z_sum, 1.0 / static_cast<double>(part.relations.size()));
    return leaky_relu(add_row_broadcast(matmul(z_mean, vars.w_fuse), vars.b_fuse),
                      opts.leaky_slope);
}

}  // namespace mimbfd
