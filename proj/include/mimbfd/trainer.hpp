#pragma once

#include <filesystem>
#include <vector>

#include "mimbfd/metrics.hpp"
#include "mimbfd/model.hpp"

namespace mimbfd {

struct TraceRow {
    std::int64_t epoch;
    double train_loss;
    double val_auc;
};

struct EvalReport {
    EvalMetrics metrics;
    std::int64_t epochs_run = 0;
    std::int64_t best_epoch = 0;
    double best_val_auc = 0.0;
    std::vector<TraceRow> trace;
    std::uint64_t seed = 0;
    std::string config_hash;
};

// Mean cross-entropy over the training nodes plus eta times the
// decorrelation loss on the training rows of the last hidden layer. With
// eta == 0 or lcd disabled this IS the cross-entropy node, bit for bit.
Var total_loss(Var logits, const std::vector<std::int64_t>& train_nodes,
               const std::vector<int>& labels, Var h_last, Var lcd_u, Var lcd_gamma,
               const LcdConfig& lcd, double eta);

// Fraud-class probability per listed node, from raw logits.
std::vector<double> fraud_scores(const Tensor& logits, const std::vector<std::int64_t>& nodes);

// Full-batch Adam with early stopping on validation AUC; returns the
// best-validation checkpoint. Deterministic per seed.
std::pair<TmrModel, EvalReport> train(const MultiRelationGraph& g, const ExperimentConfig& cfg);
std::pair<GcnModel, EvalReport> gcn_baseline(const MultiRelationGraph& g,
                                             const ExperimentConfig& cfg);

EvalMetrics evaluate(TmrModel& m, const MultiRelationGraph& g, SplitTag tag);
EvalMetrics evaluate(GcnModel& m, const MultiRelationGraph& g, SplitTag tag);

void write_report(const std::filesystem::path& file, const EvalReport& report);
void write_trace(const std::filesystem::path& file, const std::vector<TraceRow>& trace);
void write_embeddings(const std::filesystem::path& file, TmrModel& m,
                      const MultiRelationGraph& g);
EvalReport read_report(const std::filesystem::path& file);

}  // namespace mimbfd
