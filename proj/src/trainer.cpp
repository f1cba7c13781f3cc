#include "mimbfd/trainer.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "mimbfd/format.hpp"

namespace mimbfd {

using nlohmann::json;

Var total_loss(Var logits, const std::vector<std::int64_t>& train_nodes,
               const std::vector<int>& labels, Var h_last, Var lcd_u, Var lcd_gamma,
               const LcdConfig& lcd, double eta) {
    if (train_nodes.empty()) throw ConfigError("total_loss: no training nodes");
    const auto m = static_cast<std::int64_t>(train_nodes.size());
    Var train_logits = gather_rows(logits, train_nodes);
    Var log_probs = log_softmax_rows(train_logits);
    Tensor pick(m, 2);
    for (std::int64_t k = 0; k < m; ++k) {
        const int y = labels[static_cast<std::size_t>(train_nodes[static_cast<std::size_t>(k)])];
        if (y != kBenign && y != kFraud)
            throw ConfigError("total_loss: unlabeled node in training set");
        pick.at(k, y) = -1.0 / static_cast<double>(m);
    }
    Var ce = sum_all(mul_const(log_probs, pick));
    if (eta == 0.0 || !lcd.enabled) return ce;
    Var reg = lcd_loss(gather_rows(h_last, train_nodes), lcd_u, lcd_gamma, lcd);
    return add(ce, scale(reg, eta));
}

std::vector<double> fraud_scores(const Tensor& logits, const std::vector<std::int64_t>& nodes) {
    std::vector<double> out;
    out.reserve(nodes.size());
    for (std::int64_t i : nodes) {
        const double margin = logits.at(i, 1) - logits.at(i, 0);
        out.push_back(margin >= 0.0 ? 1.0 / (1.0 + std::exp(-margin))
                                    : std::exp(margin) / (1.0 + std::exp(margin)));
    }
    return out;
}

namespace {

std::vector<int> hard_predictions(const Tensor& logits, const std::vector<std::int64_t>& nodes) {
    std::vector<int> out;
    out.reserve(nodes.size());
    for (std::int64_t i : nodes) out.push_back(logits.at(i, 1) > logits.at(i, 0) ? 1 : 0);
    return out;
}

std::vector<int> labels_of(const std::vector<int>& labels, const std::vector<std::int64_t>& nodes) {
    std::vector<int> out;
    out.reserve(nodes.size());
    for (std::int64_t i : nodes) out.push_back(labels[static_cast<std::size_t>(i)]);
    return out;
}

template <typename Model>
EvalMetrics evaluate_impl(Model& m, const MultiRelationGraph& g, SplitTag tag) {
    const std::vector<std::int64_t> nodes = m.split.nodes_with(tag);
    if (nodes.empty()) throw ConfigError("evaluate: empty split");
    Tape tape;
    BoundForward bf = bind_forward(m, tape, g.features);
    const Tensor& logits = tape.value(bf.logits);
    return compute_metrics(fraud_scores(logits, nodes), hard_predictions(logits, nodes),
                           labels_of(g.labels, nodes));
}

template <typename Model>
EvalReport train_loop(Model& model, const MultiRelationGraph& g, const ExperimentConfig& cfg,
                      bool use_lcd) {
    auto params = named_params(model);
    std::vector<Tensor*> param_ptrs;
    for (auto& [name, t] : params) param_ptrs.push_back(t);

    AdamState opt(AdamConfig{cfg.lr, 0.9, 0.999, 1e-8});
    EvalReport report;
    report.seed = cfg.seed;
    report.config_hash = config_hash(cfg);

    double best_val = -std::numeric_limits<double>::infinity();
    std::int64_t best_epoch = 0;
    std::vector<Tensor> best_values;

    std::int64_t epoch = 0;
    while (epoch < cfg.epochs) {
        ++epoch;
        Tape tape;
        BoundForward bf = bind_forward(model, tape, g.features);
        Var loss = total_loss(bf.logits, model.train_nodes, g.labels, bf.h_last, bf.lcd_u,
                              bf.lcd_gamma, cfg.lcd, use_lcd ? cfg.eta : 0.0);
        const double loss_value = tape.value(loss).v[0];
        if (!std::isfinite(loss_value))
            throw NumericError("train: non-finite loss at epoch " + std::to_string(epoch));

        // Validation metrics come from this same full-batch forward, i.e.
        // from the parameters before this epoch's update; the checkpoint
        // below snapshots exactly those parameters.
        const Tensor& logits = tape.value(bf.logits);
        const double val_auc = binary_auc(fraud_scores(logits, model.val_nodes),
                                          labels_of(g.labels, model.val_nodes));
        report.trace.push_back({epoch, loss_value, val_auc});
        if (val_auc > best_val) {
            best_val = val_auc;
            best_epoch = epoch;
            best_values.clear();
            for (Tensor* t : param_ptrs) best_values.push_back(*t);
        }

        tape.backward(loss);
        std::vector<const Tensor*> grads;
        std::vector<Tensor> grad_storage;
        grad_storage.reserve(params.size());
        for (std::size_t k = 0; k < params.size(); ++k) {
            grad_storage.push_back(tape.grad(bf.param_vars[k]));
            if (!cfg.lcd.gamma_trainable && params[k].first == "lcd.gamma")
                grad_storage.back() = Tensor::zeros(grad_storage.back().rows,
                                                    grad_storage.back().cols);
        }
        for (const Tensor& gt : grad_storage) grads.push_back(&gt);
        adam_step(param_ptrs, grads, opt);

        if (epoch - best_epoch >= cfg.patience) break;
    }

    for (std::size_t k = 0; k < param_ptrs.size(); ++k) *param_ptrs[k] = best_values[k];
    report.epochs_run = epoch;
    report.best_epoch = best_epoch;
    report.best_val_auc = best_val;
    report.metrics = evaluate_impl(model, g, SplitTag::test);
    return report;
}

}  // namespace

std::pair<TmrModel, EvalReport> train(const MultiRelationGraph& g, const ExperimentConfig& cfg) {
    if (cfg.model != "mimbfd")
        throw ConfigError("train: config names model '" + cfg.model + "', expected mimbfd");
    TmrModel model = init_tmr_model(g, cfg);
    const bool use_lcd = cfg.lcd.enabled && cfg.eta != 0.0;
    EvalReport report = train_loop(model, g, cfg, use_lcd);
    return {std::move(model), std::move(report)};
}

std::pair<GcnModel, EvalReport> gcn_baseline(const MultiRelationGraph& g,
                                             const ExperimentConfig& cfg) {
    ExperimentConfig c = cfg;
    c.model = "gcn";
    GcnModel model = init_gcn_model(g, c);
    EvalReport report = train_loop(model, g, c, /*use_lcd=*/false);
    return {std::move(model), std::move(report)};
}

EvalMetrics evaluate(TmrModel& m, const MultiRelationGraph& g, SplitTag tag) {
    return evaluate_impl(m, g, tag);
}

EvalMetrics evaluate(GcnModel& m, const MultiRelationGraph& g, SplitTag tag) {
    return evaluate_impl(m, g, tag);
}

void write_report(const std::filesystem::path& file, const EvalReport& report) {
    json j;
    j["auc"] = report.metrics.auc;
    j["recall"] = report.metrics.recall_fraud;
    j["recall_macro"] = report.metrics.recall_macro;
    j["f1"] = report.metrics.f1_macro;
    j["f1_fraud"] = report.metrics.f1_fraud;
    j["confusion"] = {{"tp", report.metrics.confusion.tp},
                      {"fp", report.metrics.confusion.fp},
                      {"tn", report.metrics.confusion.tn},
                      {"fn", report.metrics.confusion.fn}};
    j["epochs_run"] = report.epochs_run;
    j["best_epoch"] = report.best_epoch;
    j["best_val_auc"] = report.best_val_auc;
    j["seed"] = report.seed;
    j["config_hash"] = report.config_hash;
    std::ofstream out(file);
    if (!out) throw FormatError("cannot write " + file.string());
    out << j.dump(2) << "\n";
}

EvalReport read_report(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw FormatError("cannot open " + file.string());
    json j;
    in >> j;
    EvalReport r;
    r.metrics.auc = j.at("auc").get<double>();
    r.metrics.recall_fraud = j.at("recall").get<double>();
    r.metrics.recall_macro = j.at("recall_macro").get<double>();
    r.metrics.f1_macro = j.at("f1").get<double>();
    r.metrics.f1_fraud = j.at("f1_fraud").get<double>();
    r.metrics.confusion.tp = j.at("confusion").at("tp").get<std::int64_t>();
    r.metrics.confusion.fp = j.at("confusion").at("fp").get<std::int64_t>();
    r.metrics.confusion.tn = j.at("confusion").at("tn").get<std::int64_t>();
    r.metrics.confusion.fn = j.at("confusion").at("fn").get<std::int64_t>();
    r.epochs_run = j.at("epochs_run").get<std::int64_t>();
    r.best_epoch = j.at("best_epoch").get<std::int64_t>();
    r.best_val_auc = j.at("best_val_auc").get<double>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.config_hash = j.at("config_hash").get<std::string>();
    return r;
}

void write_trace(const std::filesystem::path& file, const std::vector<TraceRow>& trace) {
    std::ofstream out(file);
    if (!out) throw FormatError("cannot write " + file.string());
    out << "epoch\ttrain_loss\tval_auc\n";
    for (const auto& row : trace)
        out << row.epoch << '\t' << fmt_double(row.train_loss) << '\t' << fmt_double(row.val_auc)
            << '\n';
}

void write_embeddings(const std::filesystem::path& file, TmrModel& m,
                      const MultiRelationGraph& g) {
    Tape tape;
    BoundForward bf = bind_forward(m, tape, g.features);
    const Tensor& h = tape.value(bf.h_last);
    std::ofstream out(file);
    if (!out) throw FormatError("cannot write " + file.string());
    for (NodeId i = 0; i < g.num_nodes; ++i) {
        out << i << '\t' << g.labels[static_cast<std::size_t>(i)];
        for (std::int64_t j = 0; j < h.cols; ++j) out << '\t' << fmt_double(h.at(i, j));
        out << '\n';
    }
}

}  // namespace mimbfd
