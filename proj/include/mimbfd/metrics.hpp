#pragma once

#include <cstdint>
#include <vector>

namespace mimbfd {

struct ConfusionCounts {
    std::int64_t tp = 0;  // fraud predicted fraud
    std::int64_t fp = 0;
    std::int64_t tn = 0;
    std::int64_t fn = 0;

    std::int64_t total() const { return tp + fp + tn + fn; }
};

struct EvalMetrics {
    double auc = 0.0;
    double recall_fraud = 0.0;
    double recall_macro = 0.0;
    double f1_macro = 0.0;
    double f1_fraud = 0.0;
    ConfusionCounts confusion;
};

// Probability that a random fraud node outranks a random benign node by
// score, ties counted 1/2. Average-rank formulation; exact in the
// half-integer arithmetic the pairwise count uses. Throws ConfigError when
// only one class is present (AUC undefined).
double binary_auc(const std::vector<double>& scores, const std::vector<int>& labels);

// labels and predictions in {0,1}; scores drive AUC only.
EvalMetrics compute_metrics(const std::vector<double>& scores, const std::vector<int>& predictions,
                            const std::vector<int>& labels);

}  // namespace mimbfd
