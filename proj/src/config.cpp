#include "mimbfd/config.hpp"

#include <fstream>

namespace mimbfd {

using nlohmann::json;

void ExperimentConfig::validate() const {
    gpr.validate();
    lcd.validate();
    if (model != "mimbfd" && model != "gcn")
        throw ConfigError("config: model must be 'mimbfd' or 'gcn', got '" + model + "'");
    if (num_layers < 1) throw ConfigError("config: num_layers must be >= 1");
    if (hidden_dim < 1) throw ConfigError("config: hidden_dim must be >= 1");
    if (epochs < 1) throw ConfigError("config: epochs must be >= 1");
    if (patience < 1) throw ConfigError("config: patience must be >= 1");
    if (eta < 0) throw ConfigError("config: eta must be >= 0");
    if (lr <= 0) throw ConfigError("config: lr must be > 0");
}

json config_to_json(const ExperimentConfig& cfg, bool include_paths) {
    json j;
    j["seed"] = cfg.seed;
    j["split"] = {{"train", cfg.train_ratio}, {"val", cfg.val_ratio}, {"test", cfg.test_ratio}};
    j["gpr"] = {{"alpha", cfg.gpr.alpha}, {"tol", cfg.gpr.tol}, {"max_iters", cfg.gpr.max_iters}};
    j["model"] = {{"kind", cfg.model},
                  {"hidden_dim", cfg.hidden_dim},
                  {"num_layers", cfg.num_layers},
                  {"leaky_slope", cfg.leaky_slope},
                  {"uniform_weights", cfg.uniform_weights},
                  {"frozen_gate", cfg.frozen_gate}};
    j["train"] = {{"lr", cfg.lr},
                  {"epochs", cfg.epochs},
                  {"patience", cfg.patience},
                  {"eta", cfg.eta}};
    j["lcd"] = {{"enabled", cfg.lcd.enabled},
                {"lambda1", cfg.lcd.lambda1},
                {"lambda2", cfg.lcd.lambda2},
                {"gamma_trainable", cfg.lcd.gamma_trainable},
                {"variant", to_string(cfg.lcd.variant)}};
    if (include_paths) {
        j["paths"] = {{"graph_dir", cfg.graph_dir}, {"out_dir", cfg.out_dir}};
    }
    return j;
}

namespace {

template <typename T>
void maybe(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig cfg;
    maybe(j, "seed", cfg.seed);
    if (j.contains("split")) {
        const auto& s = j.at("split");
        maybe(s, "train", cfg.train_ratio);
        maybe(s, "val", cfg.val_ratio);
        maybe(s, "test", cfg.test_ratio);
    }
    if (j.contains("gpr")) {
        const auto& g = j.at("gpr");
        maybe(g, "alpha", cfg.gpr.alpha);
        maybe(g, "tol", cfg.gpr.tol);
        maybe(g, "max_iters", cfg.gpr.max_iters);
    }
    if (j.contains("model")) {
        const auto& m = j.at("model");
        maybe(m, "kind", cfg.model);
        maybe(m, "hidden_dim", cfg.hidden_dim);
        maybe(m, "num_layers", cfg.num_layers);
        maybe(m, "leaky_slope", cfg.leaky_slope);
        maybe(m, "uniform_weights", cfg.uniform_weights);
        maybe(m, "frozen_gate", cfg.frozen_gate);
    }
    if (j.contains("train")) {
        const auto& t = j.at("train");
        maybe(t, "lr", cfg.lr);
        maybe(t, "epochs", cfg.epochs);
        maybe(t, "patience", cfg.patience);
        maybe(t, "eta", cfg.eta);
    }
    if (j.contains("lcd")) {
        const auto& l = j.at("lcd");
        maybe(l, "enabled", cfg.lcd.enabled);
        maybe(l, "lambda1", cfg.lcd.lambda1);
        maybe(l, "lambda2", cfg.lcd.lambda2);
        maybe(l, "gamma_trainable", cfg.lcd.gamma_trainable);
        if (l.contains("variant"))
            cfg.lcd.variant = lcd_variant_from_string(l.at("variant").get<std::string>());
    }
    if (j.contains("paths")) {
        const auto& p = j.at("paths");
        maybe(p, "graph_dir", cfg.graph_dir);
        maybe(p, "out_dir", cfg.out_dir);
    }
    return cfg;
}

ExperimentConfig load_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    return config_from_json(j);
}

std::string config_hash(const ExperimentConfig& cfg) {
    json j = config_to_json(cfg, /*include_paths=*/false);
    j.erase("seed");
    const std::string dump = j.dump();  // keys sorted by the json object type
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : dump) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    static const char* hex = "0123456789abcdef";
    for (int i = 0; i < 16; ++i) buf[15 - i] = hex[(h >> (4 * i)) & 0xF];
    buf[16] = '\0';
    return std::string(buf);
}

}  // namespace mimbfd
