#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "mimbfd/gpr.hpp"
#include "mimbfd/lcd.hpp"

namespace mimbfd {

// Everything one run needs: seed, split, architecture, optimizer, loss mix.
// Paths live here too but stay out of the config hash.
struct ExperimentConfig {
    std::uint64_t seed = 7;

    double train_ratio = 0.4;
    double val_ratio = 0.2;
    double test_ratio = 0.4;

    GprConfig gpr;

    std::string model = "mimbfd";  // "mimbfd" | "gcn"
    std::int64_t hidden_dim = 64;
    std::int64_t num_layers = 2;
    double leaky_slope = 0.01;
    bool uniform_weights = false;  // reachability-off ablation: p = 1/n
    bool frozen_gate = false;      // reachability-off ablation: beta = 0.5

    double lr = 0.01;
    std::int64_t epochs = 200;
    std::int64_t patience = 30;
    double eta = 0.5;  // balance between classification and decorrelation loss

    LcdConfig lcd;

    std::string graph_dir;
    std::string out_dir;

    void validate() const;
};

nlohmann::json config_to_json(const ExperimentConfig& cfg, bool include_paths = true);
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config_file(const std::filesystem::path& path);

// FNV-1a over the canonical (key-sorted) dump, excluding paths and seed so
// that semantically identical runs compare equal across seeds and output
// locations. 16 hex chars.
std::string config_hash(const ExperimentConfig& cfg);

}  // namespace mimbfd
