#include <doctest.h>

#include <cmath>

#include "mimbfd/metrics.hpp"

#include "helpers.hpp"

using namespace mimbfd;

TEST_CASE("AUC of a perfect ranking is 1") {
    CHECK(binary_auc({0.9, 0.8, 0.1, 0.2}, {1, 1, 0, 0}) == 1.0);
}

TEST_CASE("AUC hand example: 3 wins of 4 pairs") {
    CHECK(binary_auc({0.9, 0.4, 0.6, 0.1}, {1, 1, 0, 0}) == doctest::Approx(0.75));
}

TEST_CASE("ties count half") {
    CHECK(binary_auc({0.5, 0.5}, {1, 0}) == doctest::Approx(0.5));
}

TEST_CASE("single-class input is an error, not a number") {
    CHECK_THROWS_AS(binary_auc({0.1, 0.9}, {1, 1}), ConfigError);
    CHECK_THROWS_AS(binary_auc({0.1, 0.9}, {0, 0}), ConfigError);
}

TEST_CASE("rank AUC equals brute-force pairwise counting exactly, with ties") {
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        Rng rng(seed);
        const std::size_t n = 2 + rng.uniform_int(499);
        std::vector<double> scores(n);
        std::vector<int> labels(n);
        // coarse grid of score values forces plenty of ties
        const int grid = 1 + static_cast<int>(rng.uniform_int(12));
        for (std::size_t i = 0; i < n; ++i) {
            scores[i] = static_cast<double>(rng.uniform_int(static_cast<std::uint64_t>(grid))) /
                        static_cast<double>(grid);
            labels[i] = rng.uniform() < 0.3 ? 1 : 0;
        }
        labels[0] = 1;
        labels[1] = 0;
        CHECK(binary_auc(scores, labels) == testutil::auc_bruteforce(scores, labels));
    }
}

TEST_CASE("strictly increasing transforms leave AUC unchanged") {
    Rng rng(9);
    std::vector<double> scores(200);
    std::vector<int> labels(200);
    for (std::size_t i = 0; i < scores.size(); ++i) {
        scores[i] = rng.normal();
        labels[i] = rng.uniform() < 0.25 ? 1 : 0;
    }
    labels[0] = 1;
    labels[1] = 0;
    const double base = binary_auc(scores, labels);
    std::vector<double> warped = scores;
    for (auto& s : warped) s = std::exp(2.0 * s) + 5.0;
    CHECK(binary_auc(warped, labels) == base);
}

TEST_CASE("confusion counts and derived metrics") {
    // predictions all benign while fraud exists: fraud recall 0
    const std::vector<double> scores{0.1, 0.2, 0.3, 0.4};
    const std::vector<int> preds{0, 0, 0, 0};
    const std::vector<int> labels{1, 0, 1, 0};
    const EvalMetrics m = compute_metrics(scores, preds, labels);
    CHECK(m.recall_fraud == 0.0);
    CHECK(m.confusion.tp == 0);
    CHECK(m.confusion.fn == 2);
    CHECK(m.confusion.tn == 2);
    CHECK(m.confusion.fp == 0);
    CHECK(m.confusion.total() == 4);
    // benign F1 = 2*2/(2*2+0+2) = 2/3; fraud F1 = 0 -> macro 1/3
    CHECK(m.f1_macro == doctest::Approx(1.0 / 3.0));
    CHECK(m.recall_macro == doctest::Approx(0.5));
}

TEST_CASE("exact confusion on a mixed prediction") {
    const std::vector<double> scores{0.9, 0.2, 0.7, 0.4};
    const std::vector<int> preds{1, 0, 1, 1};
    const std::vector<int> labels{1, 1, 0, 0};
    const EvalMetrics m = compute_metrics(scores, preds, labels);
    CHECK(m.confusion.tp == 1);
    CHECK(m.confusion.fn == 1);
    CHECK(m.confusion.fp == 2);
    CHECK(m.confusion.tn == 0);
    CHECK(m.recall_fraud == doctest::Approx(0.5));
}
