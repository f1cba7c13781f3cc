#include "mimbfd/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <string>

#include "mimbfd/metrics.hpp"
#include "mimbfd/rng.hpp"

namespace mimbfd {

using nlohmann::json;

void SynthSpec::validate() const {
    if (n < 4) throw ConfigError("synth: n must be >= 4");
    if (!(fraud_fraction > 0.0 && fraud_fraction < 0.5))
        throw ConfigError("synth: fraud_fraction must be in (0, 0.5)");
    if (static_cast<double>(n) * fraud_fraction < 2.0)
        throw ConfigError("synth: need n * fraud_fraction >= 2");
    if (num_relations < 1) throw ConfigError("synth: num_relations must be >= 1");
    if (mean_degree <= 0.0) throw ConfigError("synth: mean_degree must be > 0");
    for (double h : {homophily_benign, homophily_fraud})
        if (h < 0.0 || h > 1.0) throw ConfigError("synth: homophily must be in [0,1]");
    if (camouflage_rate < 0.0 || camouflage_rate > 1.0)
        throw ConfigError("synth: camouflage_rate must be in [0,1]");
    if (low_cc_bias < 0.0) throw ConfigError("synth: low_cc_bias must be >= 0");
    if (feature_dim < 1) throw ConfigError("synth: feature_dim must be >= 1");
    if (class_mean_separation < 0.0) throw ConfigError("synth: separation must be >= 0");
}

json synth_spec_to_json(const SynthSpec& s) {
    return json{{"n", s.n},
                {"fraud_fraction", s.fraud_fraction},
                {"num_relations", s.num_relations},
                {"mean_degree", s.mean_degree},
                {"homophily_benign", s.homophily_benign},
                {"homophily_fraud", s.homophily_fraud},
                {"camouflage_rate", s.camouflage_rate},
                {"low_cc_bias", s.low_cc_bias},
                {"feature_dim", s.feature_dim},
                {"class_mean_separation", s.class_mean_separation},
                {"seed", s.seed}};
}

SynthSpec synth_spec_from_json(const json& j) {
    SynthSpec s;
    s.n = j.value("n", s.n);
    s.fraud_fraction = j.value("fraud_fraction", s.fraud_fraction);
    s.num_relations = j.value("num_relations", s.num_relations);
    s.mean_degree = j.value("mean_degree", s.mean_degree);
    s.homophily_benign = j.value("homophily_benign", s.homophily_benign);
    s.homophily_fraud = j.value("homophily_fraud", s.homophily_fraud);
    s.camouflage_rate = j.value("camouflage_rate", s.camouflage_rate);
    s.low_cc_bias = j.value("low_cc_bias", s.low_cc_bias);
    s.feature_dim = j.value("feature_dim", s.feature_dim);
    s.class_mean_separation = j.value("class_mean_separation", s.class_mean_separation);
    s.seed = j.value("seed", s.seed);
    return s;
}

namespace {

// Weighted draw from `pool` with weight(deg) = (1+deg)^exponent over current
// degrees. Linear scan; generation sizes stay desk-scale.
NodeId draw_weighted(const std::vector<NodeId>& pool, const std::vector<std::int64_t>& deg,
                     double exponent, Rng& rng) {
    double total = 0.0;
    for (NodeId v : pool)
        total += std::pow(1.0 + static_cast<double>(deg[static_cast<std::size_t>(v)]), exponent);
    double target = rng.uniform() * total;
    for (NodeId v : pool) {
        target -= std::pow(1.0 + static_cast<double>(deg[static_cast<std::size_t>(v)]), exponent);
        if (target <= 0.0) return v;
    }
    return pool.back();
}

}  // namespace

MultiRelationGraph generate(const SynthSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);

    // class assignment: a random subset of round(n * fraud_fraction) fraudsters
    const auto num_fraud = static_cast<std::int64_t>(
        std::llround(static_cast<double>(spec.n) * spec.fraud_fraction));
    std::vector<NodeId> order(static_cast<std::size_t>(spec.n));
    for (NodeId i = 0; i < spec.n; ++i) order[static_cast<std::size_t>(i)] = i;
    rng.shuffle(order);
    std::vector<int> labels(static_cast<std::size_t>(spec.n), kBenign);
    std::vector<NodeId> fraud_nodes, benign_nodes;
    for (std::int64_t k = 0; k < spec.n; ++k) {
        if (k < num_fraud) {
            labels[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])] = kFraud;
            fraud_nodes.push_back(order[static_cast<std::size_t>(k)]);
        } else {
            benign_nodes.push_back(order[static_cast<std::size_t>(k)]);
        }
    }
    std::sort(fraud_nodes.begin(), fraud_nodes.end());
    std::sort(benign_nodes.begin(), benign_nodes.end());

    // camouflaged fraudsters draw their features from the benign component
    std::vector<NodeId> fraud_shuffled = fraud_nodes;
    rng.shuffle(fraud_shuffled);
    const auto num_camouflaged = static_cast<std::int64_t>(std::llround(
        spec.camouflage_rate * static_cast<double>(fraud_nodes.size())));
    std::vector<bool> camouflaged(static_cast<std::size_t>(spec.n), false);
    for (std::int64_t k = 0; k < num_camouflaged; ++k)
        camouflaged[static_cast<std::size_t>(fraud_shuffled[static_cast<std::size_t>(k)])] = true;

    // Gaussian mixture: benign mean 0, fraud mean separated along 1/sqrt(d)
    const double mean_shift =
        spec.class_mean_separation / std::sqrt(static_cast<double>(spec.feature_dim));
    Tensor features(spec.n, spec.feature_dim);
    for (NodeId i = 0; i < spec.n; ++i) {
        const bool fraud_features =
            labels[static_cast<std::size_t>(i)] == kFraud && !camouflaged[static_cast<std::size_t>(i)];
        for (std::int64_t j = 0; j < spec.feature_dim; ++j)
            features.at(i, j) = rng.normal() + (fraud_features ? mean_shift : 0.0);
    }

    // wiring: same-class targets mildly preferential, fraud->benign targets
    // biased toward low current degree
    MultiRelationGraph g;
    g.num_nodes = spec.n;
    g.features = std::move(features);
    g.labels = labels;
    const auto edges_per_relation = static_cast<std::int64_t>(
        std::llround(static_cast<double>(spec.n) * spec.mean_degree / 2.0));
    for (int r = 0; r < spec.num_relations; ++r) {
        // split the edge budget by sampling a source class and its homophily coin
        std::int64_t same_benign = 0, same_fraud = 0, cross = 0;
        for (std::int64_t e = 0; e < edges_per_relation; ++e) {
            const NodeId src =
                static_cast<NodeId>(rng.uniform_int(static_cast<std::uint64_t>(spec.n)));
            const bool src_fraud = g.labels[static_cast<std::size_t>(src)] == kFraud;
            const double homophily = src_fraud ? spec.homophily_fraud : spec.homophily_benign;
            if (rng.uniform() < homophily)
                (src_fraud ? same_fraud : same_benign)++;
            else
                ++cross;
        }

        std::set<std::pair<NodeId, NodeId>> edge_set;
        std::vector<std::int64_t> deg(static_cast<std::size_t>(spec.n), 0);
        auto place = [&](std::int64_t count, auto&& draw_pair, const char* kind) {
            std::int64_t placed = 0, attempts = 0;
            const std::int64_t cap = 200 * count + 1000;
            while (placed < count) {
                if (++attempts > cap)
                    throw ConfigError("synth: relation " + std::to_string(r) + " infeasible (" +
                                      std::string(kind) +
                                      " edges exhausted; relax degree or homophily)");
                const auto [a, b] = draw_pair();
                if (a == b) continue;
                const auto key = std::minmax(a, b);
                if (!edge_set.insert({key.first, key.second}).second) continue;
                deg[static_cast<std::size_t>(a)]++;
                deg[static_cast<std::size_t>(b)]++;
                ++placed;
            }
        };

        // intra-class wiring first: mildly preferential, creates the degree
        // (and hence centrality) spread the cross edges will key on
        place(same_benign, [&] {
            const NodeId a = benign_nodes[static_cast<std::size_t>(
                rng.uniform_int(benign_nodes.size()))];
            return std::pair<NodeId, NodeId>(a, draw_weighted(benign_nodes, deg, 1.0, rng));
        }, "benign-benign");
        place(same_fraud, [&] {
            const NodeId a = fraud_nodes[static_cast<std::size_t>(
                rng.uniform_int(fraud_nodes.size()))];
            return std::pair<NodeId, NodeId>(a, draw_weighted(fraud_nodes, deg, 1.0, rng));
        }, "fraud-fraud");
        // cross edges anchor on a low-degree benign endpoint, so fraud
        // contact concentrates where information spreads slowly
        place(cross, [&] {
            const NodeId a = draw_weighted(benign_nodes, deg, -spec.low_cc_bias, rng);
            const NodeId b =
                fraud_nodes[static_cast<std::size_t>(rng.uniform_int(fraud_nodes.size()))];
            return std::pair<NodeId, NodeId>(a, b);
        }, "fraud-benign");

        std::vector<std::pair<NodeId, NodeId>> edges(edge_set.begin(), edge_set.end());
        g.relations.push_back(RelationAdjacency::from_edges(spec.n, edges));
        g.relation_names.push_back("r" + std::to_string(r + 1));
    }
    g.validate();
    return g;
}

void generate_to_dir(const SynthSpec& spec, const std::filesystem::path& dir) {
    const MultiRelationGraph g = generate(spec);
    save_graph(g, dir);
    std::ofstream out(dir / "synth_spec.json");
    out << synth_spec_to_json(spec).dump(2) << "\n";
}

double feature_logistic_auc(const MultiRelationGraph& g, std::uint64_t seed) {
    const std::int64_t n = g.num_nodes, d = g.feature_dim();
    std::vector<NodeId> labeled;
    for (NodeId i = 0; i < n; ++i)
        if (g.labels[static_cast<std::size_t>(i)] != kUnlabeled) labeled.push_back(i);
    if (labeled.size() < 4) throw ConfigError("feature oracle: too few labeled nodes");
    Rng rng(seed);
    rng.shuffle(labeled);
    const std::size_t half = labeled.size() / 2;
    std::vector<NodeId> fit(labeled.begin(), labeled.begin() + static_cast<std::ptrdiff_t>(half));
    std::vector<NodeId> held(labeled.begin() + static_cast<std::ptrdiff_t>(half), labeled.end());

    // full-batch gradient descent on logistic loss
    std::vector<double> w(static_cast<std::size_t>(d), 0.0);
    double bias = 0.0;
    const double lr = 0.1;
    for (int step = 0; step < 300; ++step) {
        std::vector<double> grad_w(static_cast<std::size_t>(d), 0.0);
        double grad_b = 0.0;
        for (NodeId i : fit) {
            double z = bias;
            for (std::int64_t j = 0; j < d; ++j)
                z += w[static_cast<std::size_t>(j)] * g.features.at(i, j);
            const double p = 1.0 / (1.0 + std::exp(-z));
            const double err = p - (g.labels[static_cast<std::size_t>(i)] == kFraud ? 1.0 : 0.0);
            for (std::int64_t j = 0; j < d; ++j)
                grad_w[static_cast<std::size_t>(j)] += err * g.features.at(i, j);
            grad_b += err;
        }
        const double inv = 1.0 / static_cast<double>(fit.size());
        for (std::int64_t j = 0; j < d; ++j) w[static_cast<std::size_t>(j)] -= lr * inv * grad_w[static_cast<std::size_t>(j)];
        bias -= lr * inv * grad_b;
    }

    std::vector<double> scores;
    std::vector<int> ys;
    for (NodeId i : held) {
        double z = bias;
        for (std::int64_t j = 0; j < d; ++j)
            z += w[static_cast<std::size_t>(j)] * g.features.at(i, j);
        scores.push_back(z);
        ys.push_back(g.labels[static_cast<std::size_t>(i)] == kFraud ? 1 : 0);
    }
    return binary_auc(scores, ys);
}

CalibrationReport calibrate(const SynthSpec& spec, int num_seeds) {
    if (num_seeds < 1) throw ConfigError("calibrate: num_seeds must be >= 1");
    CalibrationReport rep;
    rep.num_seeds = num_seeds;
    rep.mean_degree.assign(static_cast<std::size_t>(spec.num_relations), 0.0);
    rep.realized_homophily.assign(static_cast<std::size_t>(spec.num_relations), 0.0);
    for (int s = 0; s < num_seeds; ++s) {
        SynthSpec sp = spec;
        sp.seed = spec.seed + static_cast<std::uint64_t>(s);
        const MultiRelationGraph g = generate(sp);
        rep.realized_fraud_fraction +=
            static_cast<double>(g.count_label(kFraud)) / static_cast<double>(g.num_nodes);
        for (std::size_t r = 0; r < g.relations.size(); ++r) {
            const auto& adj = g.relations[r];
            rep.mean_degree[r] +=
                static_cast<double>(adj.nnz()) / static_cast<double>(g.num_nodes);
            std::int64_t same = 0, total = 0;
            for (NodeId i = 0; i < g.num_nodes; ++i)
                for (const NodeId* p = adj.row_begin(i); p != adj.row_end(i); ++p)
                    if (i < *p) {
                        ++total;
                        if (g.labels[static_cast<std::size_t>(i)] ==
                            g.labels[static_cast<std::size_t>(*p)])
                            ++same;
                    }
            rep.realized_homophily[r] +=
                total > 0 ? static_cast<double>(same) / static_cast<double>(total) : 0.0;
        }
        rep.feature_oracle_auc += feature_logistic_auc(g, sp.seed + 1);
    }
    const double inv = 1.0 / static_cast<double>(num_seeds);
    rep.realized_fraud_fraction *= inv;
    rep.feature_oracle_auc *= inv;
    for (auto& x : rep.mean_degree) x *= inv;
    for (auto& x : rep.realized_homophily) x *= inv;
    return rep;
}

json calibration_to_json(const CalibrationReport& rep) {
    return json{{"realized_fraud_fraction", rep.realized_fraud_fraction},
                {"mean_degree", rep.mean_degree},
                {"realized_homophily", rep.realized_homophily},
                {"feature_oracle_auc", rep.feature_oracle_auc},
                {"num_seeds", rep.num_seeds}};
}

}  // namespace mimbfd
