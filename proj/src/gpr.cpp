#include "mimbfd/gpr.hpp"

#include <cmath>
#include <string>

#include <Eigen/Dense>

namespace mimbfd {

void GprConfig::validate() const {
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw ConfigError("gpr: alpha must be in (0,1], got " + std::to_string(alpha));
    if (!(tol > 0.0)) throw ConfigError("gpr: tol must be > 0");
    if (max_iters < 0) throw ConfigError("gpr: max_iters must be >= 0");
}

std::int64_t GprConfig::effective_max_iters() const {
    if (max_iters > 0) return max_iters;
    if (alpha >= 1.0) return 2;
    return 10 * static_cast<std::int64_t>(std::ceil(std::log(tol) / std::log(1.0 - alpha)));
}

std::vector<double> teleport_vector(const MultiRelationGraph& g, const SplitAssignment& split,
                                    int class_id) {
    if (class_id != kBenign && class_id != kFraud)
        throw ConfigError("teleport: class must be 0 or 1");
    std::vector<NodeId> members;
    for (NodeId i = 0; i < g.num_nodes; ++i)
        if (split.tag[static_cast<std::size_t>(i)] == SplitTag::train &&
            g.labels[static_cast<std::size_t>(i)] == class_id)
            members.push_back(i);
    if (members.empty())
        throw ConfigError("teleport: no train-labeled nodes of class " +
                          std::to_string(class_id));
    std::vector<double> out(static_cast<std::size_t>(g.num_nodes), 0.0);
    const double mass = 1.0 / static_cast<double>(members.size());
    for (NodeId i : members) out[static_cast<std::size_t>(i)] = mass;
    return out;
}

Tensor teleport_matrix(const MultiRelationGraph& g, const SplitAssignment& split) {
    Tensor t(g.num_nodes, 2);
    for (int cls : {kBenign, kFraud}) {
        const auto col = teleport_vector(g, split, cls);
        for (NodeId i = 0; i < g.num_nodes; ++i) t.at(i, cls) = col[static_cast<std::size_t>(i)];
    }
    return t;
}

Tensor compute_gpr(const TransitionMatrix& transition, const Tensor& teleports,
                   const GprConfig& cfg, std::array<std::int64_t, 2>* iters_out,
                   std::array<std::vector<double>, 2>* residual_log) {
    cfg.validate();
    const NodeId n = transition.num_nodes();
    if (teleports.rows != n || teleports.cols != 2)
        throw ShapeError("compute_gpr: teleports must be " + std::to_string(n) + "x2, got " +
                         shape_str(teleports));
    const std::int64_t budget = cfg.effective_max_iters();
    const double damp = 1.0 - cfg.alpha;

    Tensor result(n, 2);
    for (int c = 0; c < 2; ++c) {
        std::vector<double> cur(static_cast<std::size_t>(n));
        for (NodeId i = 0; i < n; ++i) cur[static_cast<std::size_t>(i)] = teleports.at(i, c);
        std::vector<double> next;
        std::int64_t iter = 0;
        double residual = 0.0;
        if (residual_log) (*residual_log)[c].clear();
        while (true) {
            transition.apply(cur, next);
            residual = 0.0;
            for (NodeId i = 0; i < n; ++i) {
                double x = damp * next[static_cast<std::size_t>(i)] +
                           cfg.alpha * teleports.at(i, c);
                // L1 step difference bounds the sup-norm fixed-point residual
                residual += std::fabs(x - cur[static_cast<std::size_t>(i)]);
                next[static_cast<std::size_t>(i)] = x;
            }
            std::swap(cur, next);
            ++iter;
            if (residual_log) (*residual_log)[c].push_back(residual);
            if (residual < cfg.tol) break;
            if (iter >= budget)
                throw NumericError("compute_gpr: class " + std::to_string(c) +
                                   " did not converge in " + std::to_string(budget) +
                                   " iterations, residual " + std::to_string(residual));
        }
        if (iters_out) (*iters_out)[c] = iter;
        for (NodeId i = 0; i < n; ++i) result.at(i, c) = cur[static_cast<std::size_t>(i)];
    }
    return result;
}

Tensor dense_gpr_oracle(const RelationAdjacency& adj, const Tensor& teleports, double alpha) {
    const NodeId n = adj.num_nodes();
    if (n > 200) throw ConfigError("dense_gpr_oracle: n must be <= 200, got " + std::to_string(n));
    if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("dense_gpr_oracle: bad alpha");
    if (teleports.rows != n || teleports.cols != 2)
        throw ShapeError("dense_gpr_oracle: teleports shape " + shape_str(teleports));

    Eigen::MatrixXd m = Eigen::MatrixXd::Identity(n, n);
    for (NodeId j = 0; j < n; ++j) {
        if (adj.degree[static_cast<std::size_t>(j)] == 0) continue;
        const double w = (1.0 - alpha) / static_cast<double>(adj.degree[j]);
        // column j of A D^-1: entries at the neighbors of j
        for (const NodeId* p = adj.row_begin(j); p != adj.row_end(j); ++p) m(*p, j) -= w;
    }
    Eigen::MatrixXd rhs(n, 2);
    for (NodeId i = 0; i < n; ++i)
        for (int c = 0; c < 2; ++c) rhs(i, c) = alpha * teleports.at(i, c);
    const Eigen::MatrixXd sol = m.partialPivLu().solve(rhs);
    Tensor out(n, 2);
    for (NodeId i = 0; i < n; ++i)
        for (int c = 0; c < 2; ++c) out.at(i, c) = sol(i, c);
    return out;
}

Tensor normalize_scores(const Tensor& g) {
    if (!g.all_finite()) throw NumericError("normalize_scores: non-finite input");
    Tensor p(g.rows, g.cols);
    for (std::int64_t c = 0; c < g.cols; ++c) {
        double mx = g.at(0, c);
        for (std::int64_t i = 1; i < g.rows; ++i) mx = std::max(mx, g.at(i, c));
        double denom = 0.0;
        for (std::int64_t i = 0; i < g.rows; ++i) denom += std::exp(g.at(i, c) - mx);
        for (std::int64_t i = 0; i < g.rows; ++i) p.at(i, c) = std::exp(g.at(i, c) - mx) / denom;
    }
    return p;
}

InfluenceScores compute_influence(const MultiRelationGraph& g, const SplitAssignment& split,
                                  const GprConfig& cfg) {
    const Tensor teleports = teleport_matrix(g, split);
    InfluenceScores scores;
    scores.relations.reserve(g.relations.size());
    for (const auto& rel : g.relations) {
        const TransitionMatrix tm = transition_matrix(rel);
        RelationInfluence ri;
        ri.g = compute_gpr(tm, teleports, cfg, &ri.converged_iters, &ri.residual_log);
        ri.p = normalize_scores(ri.g);
        scores.relations.push_back(std::move(ri));
    }
    return scores;
}

}  // namespace mimbfd
