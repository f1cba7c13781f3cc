#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include <json.hpp>

#include "mimbfd/graph.hpp"

namespace mimbfd {

// Generator for labeled multi-relation graphs with controllable imbalance,
// homophily and fraud camouflage (feature borrowing + preferential
// attachment to low-degree benign nodes).
struct SynthSpec {
    std::int64_t n = 2000;
    double fraud_fraction = 0.1;
    int num_relations = 2;
    double mean_degree = 10.0;        // per relation
    double homophily_benign = 0.9;    // P(benign-sourced edge stays benign)
    double homophily_fraud = 0.5;     // P(fraud-sourced edge stays fraud)
    double camouflage_rate = 0.3;     // fraction of fraud nodes with benign features
    double low_cc_bias = 1.0;         // fraud->benign target weight (1+deg)^-bias
    std::int64_t feature_dim = 16;
    double class_mean_separation = 1.5;
    std::uint64_t seed = 7;

    void validate() const;
};

nlohmann::json synth_spec_to_json(const SynthSpec& spec);
SynthSpec synth_spec_from_json(const nlohmann::json& j);

// Fully labeled graph; callers mask labels via stratified_split or
// resample_imbalance. Bitwise reproducible per seed.
MultiRelationGraph generate(const SynthSpec& spec);

// Writes the graph-core file set plus synth_spec.json.
void generate_to_dir(const SynthSpec& spec, const std::filesystem::path& dir);

// Train/test AUC of a plain logistic regression on the node features;
// measures how much signal features alone carry.
double feature_logistic_auc(const MultiRelationGraph& g, std::uint64_t seed);

struct CalibrationReport {
    double realized_fraud_fraction = 0.0;
    std::vector<double> mean_degree;       // per relation
    std::vector<double> realized_homophily;  // per relation, same-class edge share
    double feature_oracle_auc = 0.0;
    int num_seeds = 0;
};

// Means over num_seeds generations starting at spec.seed; pins the
// synthetic fixtures the acceptance experiments rely on.
CalibrationReport calibrate(const SynthSpec& spec, int num_seeds = 10);

nlohmann::json calibration_to_json(const CalibrationReport& report);

}  // namespace mimbfd
