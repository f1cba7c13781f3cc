#include "mimbfd/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "mimbfd/errors.hpp"

namespace mimbfd {

double binary_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size())
        throw ShapeError("binary_auc: " + std::to_string(scores.size()) + " scores vs " +
                         std::to_string(labels.size()) + " labels");
    std::int64_t pos = 0, neg = 0;
    for (int y : labels) {
        if (y == 1)
            ++pos;
        else if (y == 0)
            ++neg;
        else
            throw ConfigError("binary_auc: labels must be 0/1");
    }
    if (pos == 0 || neg == 0)
        throw ConfigError("binary_auc: AUC undefined with a single class (" +
                          std::to_string(pos) + " fraud, " + std::to_string(neg) + " benign)");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // Average 1-based ranks within tie groups; rank sums stay half-integers,
    // so the result is bit-identical to explicit pairwise counting.
    double pos_rank_sum = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
        const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (std::size_t k = i; k <= j; ++k)
            if (labels[order[k]] == 1) pos_rank_sum += avg_rank;
        i = j + 1;
    }
    const double numerator =
        pos_rank_sum - static_cast<double>(pos) * (static_cast<double>(pos) + 1.0) / 2.0;
    return numerator / (static_cast<double>(pos) * static_cast<double>(neg));
}

namespace {

double f1_for_class(const ConfusionCounts& c, int cls) {
    // per-class precision/recall with the usual 0-if-empty conventions
    double tp, fp, fn;
    if (cls == 1) {
        tp = static_cast<double>(c.tp);
        fp = static_cast<double>(c.fp);
        fn = static_cast<double>(c.fn);
    } else {
        tp = static_cast<double>(c.tn);
        fp = static_cast<double>(c.fn);
        fn = static_cast<double>(c.fp);
    }
    const double denom = 2.0 * tp + fp + fn;
    return denom > 0.0 ? 2.0 * tp / denom : 0.0;
}

}  // namespace

EvalMetrics compute_metrics(const std::vector<double>& scores, const std::vector<int>& predictions,
                            const std::vector<int>& labels) {
    if (predictions.size() != labels.size() || scores.size() != labels.size())
        throw ShapeError("compute_metrics: input length mismatch");
    EvalMetrics m;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == 1)
            (predictions[i] == 1 ? m.confusion.tp : m.confusion.fn)++;
        else
            (predictions[i] == 0 ? m.confusion.tn : m.confusion.fp)++;
    }
    const auto& c = m.confusion;
    m.recall_fraud = (c.tp + c.fn) > 0
                         ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn)
                         : 0.0;
    const double recall_benign =
        (c.tn + c.fp) > 0 ? static_cast<double>(c.tn) / static_cast<double>(c.tn + c.fp) : 0.0;
    m.recall_macro = (m.recall_fraud + recall_benign) / 2.0;
    m.f1_fraud = f1_for_class(c, 1);
    m.f1_macro = (m.f1_fraud + f1_for_class(c, 0)) / 2.0;
    m.auc = binary_auc(scores, labels);
    return m;
}

}  // namespace mimbfd
