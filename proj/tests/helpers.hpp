#pragma once

// Shared test utilities: independent oracles (finite differences, pairwise
// AUC, Spearman) and fixture builders. Everything here stays decoupled from
// the implementation paths it checks.

#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <vector>

#include "mimbfd/graph.hpp"
#include "mimbfd/rng.hpp"
#include "mimbfd/tape.hpp"

namespace testutil {

using mimbfd::MultiRelationGraph;
using mimbfd::NodeId;
using mimbfd::Rng;
using mimbfd::Tape;
using mimbfd::Tensor;
using mimbfd::Var;

// ---- finite-difference gradient oracle -------------------------------------

struct GradCheckResult {
    double max_rel_error = 0.0;
    std::size_t checked = 0;
};

// build(tape, vars) must construct a scalar loss from leaves made of the
// given inputs. Central differences, step 1e-6; error is relative where the
// gradient is meaningful and absolute near zero.
template <typename BuildFn>
GradCheckResult finite_diff_check(BuildFn build, const std::vector<Tensor>& inputs,
                                  double step = 1e-6) {
    Tape tape;
    std::vector<Var> vars;
    vars.reserve(inputs.size());
    for (const Tensor& t : inputs) vars.push_back(tape.leaf(t));
    Var loss = build(tape, vars);
    tape.backward(loss);
    std::vector<Tensor> analytic;
    analytic.reserve(vars.size());
    for (Var v : vars) analytic.push_back(tape.grad(v));

    auto eval = [&](const std::vector<Tensor>& xs) {
        Tape tp;
        std::vector<Var> vs;
        vs.reserve(xs.size());
        for (const Tensor& t : xs) vs.push_back(tp.leaf(t));
        return tp.value(build(tp, vs)).v[0];
    };

    GradCheckResult res;
    for (std::size_t k = 0; k < inputs.size(); ++k) {
        for (std::int64_t i = 0; i < inputs[k].size(); ++i) {
            std::vector<Tensor> xs = inputs;
            xs[k].v[i] += step;
            const double fp = eval(xs);
            xs[k].v[i] -= 2.0 * step;
            const double fm = eval(xs);
            const double numeric = (fp - fm) / (2.0 * step);
            const double a = analytic[k].v[i];
            const double denom = std::max(std::fabs(a), std::fabs(numeric));
            const double err = denom > 1e-6 ? std::fabs(a - numeric) / denom
                                            : std::fabs(a - numeric);
            res.max_rel_error = std::max(res.max_rel_error, err);
            ++res.checked;
        }
    }
    return res;
}

// ---- pairwise AUC oracle ----------------------------------------------------

inline double auc_bruteforce(const std::vector<double>& scores, const std::vector<int>& labels) {
    double numerator = 0.0;
    std::int64_t pairs = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (labels[i] != 1) continue;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (labels[j] != 0) continue;
            ++pairs;
            if (scores[i] > scores[j])
                numerator += 1.0;
            else if (scores[i] == scores[j])
                numerator += 0.5;
        }
    }
    return numerator / static_cast<double>(pairs);
}

// ---- rank correlation --------------------------------------------------------

inline std::vector<double> average_ranks(const std::vector<double>& x) {
    std::vector<std::size_t> order(x.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> ranks(x.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
        const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
        i = j + 1;
    }
    return ranks;
}

inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    const auto rx = average_ranks(x), ry = average_ranks(y);
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += rx[i];
        my += ry[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

// ---- weighted correlation oracle (defined directly, for LCD efficacy) -------

inline double weighted_correlation(const Tensor& h, const std::vector<double>& w,
                                   std::int64_t col_a, std::int64_t col_b) {
    double wsum = 0, ma = 0, mb = 0;
    for (std::int64_t i = 0; i < h.rows; ++i) {
        wsum += w[static_cast<std::size_t>(i)];
        ma += w[static_cast<std::size_t>(i)] * h.at(i, col_a);
        mb += w[static_cast<std::size_t>(i)] * h.at(i, col_b);
    }
    ma /= wsum;
    mb /= wsum;
    double cab = 0, caa = 0, cbb = 0;
    for (std::int64_t i = 0; i < h.rows; ++i) {
        const double wi = w[static_cast<std::size_t>(i)];
        cab += wi * (h.at(i, col_a) - ma) * (h.at(i, col_b) - mb);
        caa += wi * (h.at(i, col_a) - ma) * (h.at(i, col_a) - ma);
        cbb += wi * (h.at(i, col_b) - mb) * (h.at(i, col_b) - mb);
    }
    return cab / std::sqrt(caa * cbb);
}

// ---- fixtures ----------------------------------------------------------------

// Small random labeled multi-relation graph for property tests.
inline MultiRelationGraph random_graph(NodeId n, int num_relations, double edge_prob,
                                       std::int64_t feature_dim, std::uint64_t seed) {
    Rng rng(seed);
    MultiRelationGraph g;
    g.num_nodes = n;
    g.features = Tensor::randn(n, feature_dim, rng);
    g.labels.resize(static_cast<std::size_t>(n));
    for (auto& y : g.labels) {
        const double u = rng.uniform();
        y = u < 0.4 ? 0 : (u < 0.7 ? 1 : -1);
    }
    // ensure at least two of each class
    g.labels[0] = 0;
    g.labels[1] = 0;
    g.labels[2 % static_cast<std::size_t>(n)] = 1;
    g.labels[3 % static_cast<std::size_t>(n)] = 1;
    for (int r = 0; r < num_relations; ++r) {
        std::vector<std::pair<NodeId, NodeId>> edges;
        for (NodeId i = 0; i < n; ++i)
            for (NodeId j = i + 1; j < n; ++j)
                if (rng.uniform() < edge_prob) edges.emplace_back(i, j);
        g.relations.push_back(mimbfd::RelationAdjacency::from_edges(n, edges));
        g.relation_names.push_back("r" + std::to_string(r + 1));
    }
    return g;
}

// Path graph 0-1-2-...-(n-1) as a single relation.
inline mimbfd::RelationAdjacency path_adjacency(NodeId n) {
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (NodeId i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
    return mimbfd::RelationAdjacency::from_edges(n, edges);
}

}  // namespace testutil
