#include "mimbfd/model.hpp"

#include <cmath>

namespace mimbfd {

namespace {

Tensor glorot(std::int64_t rows, std::int64_t cols, Rng& rng) {
    const double stddev = std::sqrt(2.0 / static_cast<double>(rows + cols));
    return Tensor::randn(rows, cols, rng, stddev);
}

void fill_split_nodes(const SplitAssignment& split, std::vector<std::int64_t>& train,
                      std::vector<std::int64_t>& val, std::vector<std::int64_t>& test) {
    train = split.nodes_with(SplitTag::train);
    val = split.nodes_with(SplitTag::val);
    test = split.nodes_with(SplitTag::test);
}

}  // namespace

TmrModel init_tmr_model(const MultiRelationGraph& g, const ExperimentConfig& cfg) {
    cfg.validate();
    TmrModel m;
    m.cfg = cfg;
    m.split = stratified_split(g, cfg.train_ratio, cfg.val_ratio, cfg.test_ratio, cfg.seed);
    fill_split_nodes(m.split, m.train_nodes, m.val_nodes, m.test_nodes);
    m.partition = partition_neighbors(g, m.split);
    if (cfg.uniform_weights) {
        m.weights = uniform_weights(g.num_nodes, g.relations.size());
    } else {
        m.scores = compute_influence(g, m.split, cfg.gpr);
        m.weights = extract_weights(m.scores);
    }

    Rng rng(cfg.seed + 0x9E3779B97F4A7C15ULL);
    std::int64_t d_in = g.feature_dim();
    for (std::int64_t l = 0; l < cfg.num_layers; ++l) {
        TmrLayerParams lp;
        lp.w_self = glorot(d_in, d_in, rng);
        lp.b_self = Tensor::zeros(1, d_in);
        lp.w_beta = glorot(d_in, d_in, rng);
        lp.b_beta = Tensor::zeros(1, d_in);
        lp.w_fuse = glorot(4 * d_in, cfg.hidden_dim, rng);
        lp.b_fuse = Tensor::zeros(1, cfg.hidden_dim);
        m.layers.push_back(std::move(lp));
        d_in = cfg.hidden_dim;
    }
    m.w_cls = glorot(d_in, 2, rng);
    m.b_cls = Tensor::zeros(1, 2);
    m.lcd = LcdState::init(static_cast<std::int64_t>(m.train_nodes.size()), d_in, cfg.lcd);
    return m;
}

GcnModel init_gcn_model(const MultiRelationGraph& g, const ExperimentConfig& cfg) {
    cfg.validate();
    GcnModel m;
    m.cfg = cfg;
    m.split = stratified_split(g, cfg.train_ratio, cfg.val_ratio, cfg.test_ratio, cfg.seed);
    fill_split_nodes(m.split, m.train_nodes, m.val_nodes, m.test_nodes);

    const RelationAdjacency uni = g.relation_union();
    m.neighbor_lists.offsets.assign(1, 0);
    for (NodeId i = 0; i < g.num_nodes; ++i) {
        m.neighbor_lists.indices.push_back(i);  // self edge for mean aggregation
        for (const NodeId* p = uni.row_begin(i); p != uni.row_end(i); ++p)
            m.neighbor_lists.indices.push_back(*p);
        m.neighbor_lists.offsets.push_back(
            static_cast<std::int64_t>(m.neighbor_lists.indices.size()));
    }
    m.ones.assign(static_cast<std::size_t>(g.num_nodes), 1.0);

    Rng rng(cfg.seed + 0x9E3779B97F4A7C15ULL);
    std::int64_t d_in = g.feature_dim();
    for (std::int64_t l = 0; l < cfg.num_layers; ++l) {
        m.layers.emplace_back(glorot(d_in, cfg.hidden_dim, rng), Tensor::zeros(1, cfg.hidden_dim));
        d_in = cfg.hidden_dim;
    }
    m.w_cls = glorot(d_in, 2, rng);
    m.b_cls = Tensor::zeros(1, 2);
    return m;
}

std::vector<std::pair<std::string, Tensor*>> named_params(TmrModel& m) {
    std::vector<std::pair<std::string, Tensor*>> out;
    for (std::size_t l = 0; l < m.layers.size(); ++l) {
        const std::string prefix = "layer" + std::to_string(l) + ".";
        out.emplace_back(prefix + "w_self", &m.layers[l].w_self);
        out.emplace_back(prefix + "b_self", &m.layers[l].b_self);
        out.emplace_back(prefix + "w_beta", &m.layers[l].w_beta);
        out.emplace_back(prefix + "b_beta", &m.layers[l].b_beta);
        out.emplace_back(prefix + "w_fuse", &m.layers[l].w_fuse);
        out.emplace_back(prefix + "b_fuse", &m.layers[l].b_fuse);
    }
    out.emplace_back("classifier.w", &m.w_cls);
    out.emplace_back("classifier.b", &m.b_cls);
    out.emplace_back("lcd.u", &m.lcd.u);
    out.emplace_back("lcd.gamma", &m.lcd.gamma);
    return out;
}

std::vector<std::pair<std::string, Tensor*>> named_params(GcnModel& m) {
    std::vector<std::pair<std::string, Tensor*>> out;
    for (std::size_t l = 0; l < m.layers.size(); ++l) {
        const std::string prefix = "layer" + std::to_string(l) + ".";
        out.emplace_back(prefix + "w", &m.layers[l].first);
        out.emplace_back(prefix + "b", &m.layers[l].second);
    }
    out.emplace_back("classifier.w", &m.w_cls);
    out.emplace_back("classifier.b", &m.b_cls);
    return out;
}

BoundForward bind_forward(TmrModel& m, Tape& tape, const Tensor& features) {
    BoundForward bf;
    std::vector<TmrLayerVars> layer_vars;
    for (auto& lp : m.layers) {
        TmrLayerVars lv;
        lv.w_self = tape.leaf(lp.w_self);
        lv.b_self = tape.leaf(lp.b_self);
        lv.w_beta = tape.leaf(lp.w_beta);
        lv.b_beta = tape.leaf(lp.b_beta);
        lv.w_fuse = tape.leaf(lp.w_fuse);
        lv.b_fuse = tape.leaf(lp.b_fuse);
        for (Var v : {lv.w_self, lv.b_self, lv.w_beta, lv.b_beta, lv.w_fuse, lv.b_fuse})
            bf.param_vars.push_back(v);
        layer_vars.push_back(lv);
    }
    Var w_cls = tape.leaf(m.w_cls);
    Var b_cls = tape.leaf(m.b_cls);
    bf.param_vars.push_back(w_cls);
    bf.param_vars.push_back(b_cls);
    bf.lcd_u = tape.leaf(m.lcd.u);
    bf.lcd_gamma = tape.leaf(m.lcd.gamma);
    bf.param_vars.push_back(bf.lcd_u);
    bf.param_vars.push_back(bf.lcd_gamma);

    TmrForwardOpts opts;
    opts.leaky_slope = m.cfg.leaky_slope;
    opts.frozen_gate = m.cfg.frozen_gate;

    Var h = tape.leaf(features);
    for (auto& lv : layer_vars) h = tmr_forward(h, m.partition, m.weights, lv, opts);
    bf.h_last = h;
    bf.logits = add_row_broadcast(matmul(h, w_cls), b_cls);
    return bf;
}

BoundForward bind_forward(GcnModel& m, Tape& tape, const Tensor& features) {
    BoundForward bf;
    std::vector<std::pair<Var, Var>> layer_vars;
    for (auto& [w, b] : m.layers) {
        Var wv = tape.leaf(w);
        Var bv = tape.leaf(b);
        bf.param_vars.push_back(wv);
        bf.param_vars.push_back(bv);
        layer_vars.emplace_back(wv, bv);
    }
    Var w_cls = tape.leaf(m.w_cls);
    Var b_cls = tape.leaf(m.b_cls);
    bf.param_vars.push_back(w_cls);
    bf.param_vars.push_back(b_cls);

    Var h = tape.leaf(features);
    for (auto& [wv, bv] : layer_vars) {
        Var agg = scatter_weighted_mean(h, m.neighbor_lists, m.ones);
        h = leaky_relu(add_row_broadcast(matmul(agg, wv), bv), m.cfg.leaky_slope);
    }
    bf.h_last = h;
    bf.logits = add_row_broadcast(matmul(h, w_cls), b_cls);
    return bf;
}

}  // namespace mimbfd
