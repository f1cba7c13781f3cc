#include <doctest.h>

#include <cmath>

#include "mimbfd/gpr.hpp"

#include "helpers.hpp"

using namespace mimbfd;

namespace {

SplitAssignment all_labeled_train(const MultiRelationGraph& g) {
    SplitAssignment s;
    s.tag.assign(static_cast<std::size_t>(g.num_nodes), SplitTag::unlabeled);
    for (NodeId i = 0; i < g.num_nodes; ++i)
        if (g.labels[static_cast<std::size_t>(i)] != kUnlabeled)
            s.tag[static_cast<std::size_t>(i)] = SplitTag::train;
    return s;
}

double sup_diff(const Tensor& a, const Tensor& b) {
    double m = 0.0;
    for (std::int64_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a.v[i] - b.v[i]));
    return m;
}

}  // namespace

TEST_CASE("teleport vector: uniform mass on train-labeled class members") {
    MultiRelationGraph g = testutil::random_graph(10, 1, 0.2, 2, 1);
    g.labels = {1, 1, 1, 1, 0, 0, -1, -1, -1, -1};
    SplitAssignment split = all_labeled_train(g);
    const auto tv = teleport_vector(g, split, 1);
    double sum = 0.0;
    for (int i = 0; i < 10; ++i) {
        sum += tv[static_cast<std::size_t>(i)];
        if (i < 4)
            CHECK(tv[static_cast<std::size_t>(i)] == doctest::Approx(0.25));
        else
            CHECK(tv[static_cast<std::size_t>(i)] == 0.0);
    }
    CHECK(std::fabs(sum - 1.0) < 1e-12);
}

TEST_CASE("teleport vector: singleton class is one-hot; val labels never used") {
    MultiRelationGraph g = testutil::random_graph(6, 1, 0.3, 2, 2);
    g.labels = {0, 1, 1, -1, 0, -1};
    SplitAssignment split = all_labeled_train(g);
    split.tag[4] = SplitTag::val;  // the second benign node leaves train
    const auto tv = teleport_vector(g, split, 0);
    CHECK(tv[0] == 1.0);
    CHECK(tv[4] == 0.0);
}

TEST_CASE("teleport vector: empty class in train is a configuration error") {
    MultiRelationGraph g = testutil::random_graph(6, 1, 0.3, 2, 3);
    g.labels = {0, 0, 0, -1, -1, -1};
    const SplitAssignment split = all_labeled_train(g);
    CHECK_THROWS_AS(teleport_vector(g, split, 1), ConfigError);
}

TEST_CASE("alpha = 1 returns the teleport matrix exactly") {
    MultiRelationGraph g = testutil::random_graph(12, 1, 0.25, 2, 4);
    const SplitAssignment split = all_labeled_train(g);
    const Tensor teleports = teleport_matrix(g, split);
    const TransitionMatrix tm = transition_matrix(g.relations[0]);
    GprConfig cfg;
    cfg.alpha = 1.0;
    const Tensor got = compute_gpr(tm, teleports, cfg);
    CHECK(got.v == teleports.v);
    // oracle agrees in the same degenerate case
    const Tensor oracle = dense_gpr_oracle(g.relations[0], teleports, 1.0);
    CHECK(sup_diff(oracle, teleports) < 1e-12);
}

TEST_CASE("3-node path against the dense solve") {
    const auto adj = testutil::path_adjacency(3);
    const TransitionMatrix tm = transition_matrix(adj);
    Tensor teleports(3, 2);
    teleports.at(0, 0) = 1.0;  // class 0 restarts at node 0
    teleports.at(2, 1) = 1.0;  // class 1 restarts at node 2
    GprConfig cfg;
    cfg.alpha = 0.15;
    cfg.tol = 1e-10;
    const Tensor iterative = compute_gpr(tm, teleports, cfg);
    const Tensor direct = dense_gpr_oracle(adj, teleports, 0.15);
    CHECK(sup_diff(iterative, direct) < 1e-8);
}

TEST_CASE("empty edge set: oracle returns the teleports") {
    RelationAdjacency adj;
    adj.offsets.assign(4, 0);
    adj.degree.assign(3, 0);
    Tensor teleports(3, 2);
    teleports.at(1, 0) = 1.0;
    teleports.at(2, 1) = 1.0;
    const Tensor out = dense_gpr_oracle(adj, teleports, 0.3);
    CHECK(sup_diff(out, teleports) < 1e-12);
}

TEST_CASE("disconnected component without a class source gets zero scores") {
    // component {0,1} holds all labels; component {2,3} has none
    MultiRelationGraph g;
    g.num_nodes = 4;
    g.features = Tensor(4, 1);
    g.labels = {0, 1, -1, -1};
    g.relations.push_back(RelationAdjacency::from_edges(4, {{0, 1}, {2, 3}}));
    g.relation_names = {"r1"};
    const SplitAssignment split = all_labeled_train(g);
    const InfluenceScores scores = compute_influence(g, split, {});
    CHECK(scores.relations[0].g.at(2, 0) == 0.0);
    CHECK(scores.relations[0].g.at(2, 1) == 0.0);
    CHECK(scores.relations[0].g.at(3, 0) == 0.0);
    CHECK(scores.relations[0].g.at(3, 1) == 0.0);
}

TEST_CASE("iterative solve matches the dense oracle on random graphs") {
    int done = 0;
    for (std::uint64_t seed = 1; done < 20; ++seed) {
        Rng sizes(seed * 131);
        const NodeId n = 10 + static_cast<NodeId>(sizes.uniform_int(190));
        MultiRelationGraph g = testutil::random_graph(n, 1, 4.0 / static_cast<double>(n), 2, seed);
        const SplitAssignment split = all_labeled_train(g);
        const Tensor teleports = teleport_matrix(g, split);
        const TransitionMatrix tm = transition_matrix(g.relations[0]);
        const double alpha = (done % 3 == 0) ? 0.1 : (done % 3 == 1 ? 0.15 : 0.5);
        GprConfig cfg;
        cfg.alpha = alpha;
        cfg.tol = 1e-10;
        const Tensor iterative = compute_gpr(tm, teleports, cfg);
        const Tensor direct = dense_gpr_oracle(g.relations[0], teleports, alpha);
        CHECK(sup_diff(iterative, direct) < 10.0 * cfg.tol);
        ++done;
    }
}

TEST_CASE("mass conservation on dangling-free graphs") {
    for (std::uint64_t seed : {3u, 17u, 99u}) {
        MultiRelationGraph g = testutil::random_graph(60, 1, 0.2, 2, seed);
        // densify guarantees no isolated nodes at p=0.2, but verify
        const TransitionMatrix tm = transition_matrix(g.relations[0]);
        REQUIRE(tm.dangling.empty());
        const SplitAssignment split = all_labeled_train(g);
        const Tensor gm = compute_gpr(tm, teleport_matrix(g, split), {});
        for (int c = 0; c < 2; ++c) {
            double colsum = 0.0;
            for (NodeId i = 0; i < g.num_nodes; ++i) colsum += gm.at(i, c);
            CHECK(std::fabs(colsum - 1.0) < 1e-9);
        }
    }
}

TEST_CASE("residuals are non-increasing after the first iteration") {
    MultiRelationGraph g = testutil::random_graph(80, 1, 0.08, 2, 5);
    const SplitAssignment split = all_labeled_train(g);
    const TransitionMatrix tm = transition_matrix(g.relations[0]);
    GprConfig cfg;
    cfg.alpha = 0.15;
    std::array<std::vector<double>, 2> log;
    compute_gpr(tm, teleport_matrix(g, split), cfg, nullptr, &log);
    for (int c = 0; c < 2; ++c) {
        REQUIRE(log[c].size() > 2);
        for (std::size_t k = 1; k + 1 < log[c].size(); ++k)
            CHECK(log[c][k + 1] <= log[c][k] * (1.0 + 1e-12));
    }
}

TEST_CASE("non-convergence raises a numeric error naming the residual") {
    MultiRelationGraph g = testutil::random_graph(40, 1, 0.2, 2, 6);
    const SplitAssignment split = all_labeled_train(g);
    const TransitionMatrix tm = transition_matrix(g.relations[0]);
    GprConfig cfg;
    cfg.alpha = 0.05;
    cfg.tol = 1e-12;
    cfg.max_iters = 3;
    CHECK_THROWS_WITH_AS(compute_gpr(tm, teleport_matrix(g, split), cfg),
                         doctest::Contains("residual"), NumericError);
}

TEST_CASE("normalize_scores: constant column becomes uniform") {
    Tensor g(4, 2);
    for (NodeId i = 0; i < 4; ++i) g.at(i, 0) = 0.7;
    for (NodeId i = 0; i < 4; ++i) g.at(i, 1) = static_cast<double>(i);
    const Tensor p = normalize_scores(g);
    for (NodeId i = 0; i < 4; ++i) CHECK(p.at(i, 0) == doctest::Approx(0.25));
}

TEST_CASE("normalize_scores: hand-computed softmax of [0, ln 2]") {
    Tensor g(2, 2);
    g.at(0, 0) = 0.0;
    g.at(1, 0) = std::log(2.0);
    const Tensor p = normalize_scores(g);
    CHECK(p.at(0, 0) == doctest::Approx(1.0 / 3.0));
    CHECK(p.at(1, 0) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("normalize_scores preserves order and sums to one per column") {
    Rng rng(12);
    const Tensor g = Tensor::randn(50, 2, rng);
    const Tensor p = normalize_scores(g);
    for (int c = 0; c < 2; ++c) {
        double sum = 0.0;
        for (NodeId i = 0; i < 50; ++i) sum += p.at(i, c);
        CHECK(sum == doctest::Approx(1.0));
        for (NodeId i = 0; i < 50; ++i)
            for (NodeId j = 0; j < 50; ++j)
                if (g.at(i, c) > g.at(j, c)) CHECK(p.at(i, c) > p.at(j, c));
    }
}

TEST_CASE("relabeling permutes influence rows identically") {
    MultiRelationGraph g = testutil::random_graph(30, 1, 0.15, 2, 7);
    const SplitAssignment split = all_labeled_train(g);
    const InfluenceScores base = compute_influence(g, split, {});

    // permutation pi: new id of old node i
    std::vector<NodeId> pi(static_cast<std::size_t>(g.num_nodes));
    for (NodeId i = 0; i < g.num_nodes; ++i) pi[static_cast<std::size_t>(i)] = i;
    Rng rng(8);
    rng.shuffle(pi);

    MultiRelationGraph pg;
    pg.num_nodes = g.num_nodes;
    pg.features = Tensor(g.num_nodes, g.feature_dim());
    pg.labels.assign(static_cast<std::size_t>(g.num_nodes), -1);
    pg.relation_names = g.relation_names;
    SplitAssignment psplit;
    psplit.tag.assign(static_cast<std::size_t>(g.num_nodes), SplitTag::unlabeled);
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (NodeId i = 0; i < g.num_nodes; ++i) {
        pg.labels[static_cast<std::size_t>(pi[static_cast<std::size_t>(i)])] =
            g.labels[static_cast<std::size_t>(i)];
        psplit.tag[static_cast<std::size_t>(pi[static_cast<std::size_t>(i)])] =
            split.tag[static_cast<std::size_t>(i)];
        for (const NodeId* p = g.relations[0].row_begin(i); p != g.relations[0].row_end(i); ++p)
            if (i < *p)
                edges.emplace_back(pi[static_cast<std::size_t>(i)],
                                   pi[static_cast<std::size_t>(*p)]);
    }
    pg.relations.push_back(RelationAdjacency::from_edges(g.num_nodes, edges));
    const InfluenceScores permuted = compute_influence(pg, psplit, {});
    for (NodeId i = 0; i < g.num_nodes; ++i)
        for (int c = 0; c < 2; ++c)
            CHECK(permuted.relations[0].g.at(pi[static_cast<std::size_t>(i)], c) ==
                  doctest::Approx(base.relations[0].g.at(i, c)).epsilon(1e-12));
}

TEST_CASE("influence ignores features and val/test labels (mutation test)") {
    MultiRelationGraph g = testutil::random_graph(25, 2, 0.2, 3, 9);
    SplitAssignment split = all_labeled_train(g);
    // move a couple of labeled nodes to val
    int moved = 0;
    for (NodeId i = 0; i < g.num_nodes && moved < 2; ++i)
        if (split.tag[static_cast<std::size_t>(i)] == SplitTag::train) {
            split.tag[static_cast<std::size_t>(i)] = SplitTag::val;
            ++moved;
        }
    const InfluenceScores base = compute_influence(g, split, {});

    MultiRelationGraph mutated = g;
    mutated.features.at(3, 0) += 100.0;  // feature perturbation
    for (NodeId i = 0; i < g.num_nodes; ++i)
        if (split.tag[static_cast<std::size_t>(i)] == SplitTag::val)
            mutated.labels[static_cast<std::size_t>(i)] =
                1 - mutated.labels[static_cast<std::size_t>(i)];  // flip val labels
    const InfluenceScores after = compute_influence(mutated, split, {});
    for (std::size_t r = 0; r < base.relations.size(); ++r) {
        CHECK(after.relations[r].g.v == base.relations[r].g.v);  // bitwise
        CHECK(after.relations[r].p.v == base.relations[r].p.v);
    }
}

TEST_CASE("influence scores are nonnegative with softmax columns summing to 1") {
    MultiRelationGraph g = testutil::random_graph(40, 2, 0.1, 2, 10);
    const SplitAssignment split = all_labeled_train(g);
    const InfluenceScores scores = compute_influence(g, split, {});
    for (const auto& rel : scores.relations) {
        for (double x : rel.g.v) CHECK(x >= 0.0);
        for (int c = 0; c < 2; ++c) {
            double sum = 0.0;
            for (NodeId i = 0; i < g.num_nodes; ++i) sum += rel.p.at(i, c);
            CHECK(sum == doctest::Approx(1.0));
        }
    }
}
