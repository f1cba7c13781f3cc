#include <doctest.h>

#include "mimbfd/adam.hpp"
#include "mimbfd/tape.hpp"

#include "helpers.hpp"

using namespace mimbfd;
using testutil::finite_diff_check;

TEST_CASE("matmul forward and closed-form gradient") {
    Tape tape;
    Var a = tape.leaf(Tensor(2, 3, {1, 2, 3, 4, 5, 6}));
    Var b = tape.leaf(Tensor(3, 1, {1, 0, -1}));
    Var c = matmul(a, b);
    CHECK(tape.value(c).rows == 2);
    CHECK(tape.value(c).cols == 1);
    CHECK(tape.value(c).v[0] == doctest::Approx(-2.0));
    CHECK(tape.value(c).v[1] == doctest::Approx(-2.0));
    Var loss = sum_all(c);
    tape.backward(loss);
    // d(sum)/dA = ones * b^T
    const Tensor& ga = tape.grad(a);
    for (std::int64_t i = 0; i < 2; ++i) {
        CHECK(ga.at(i, 0) == doctest::Approx(1.0));
        CHECK(ga.at(i, 1) == doctest::Approx(0.0));
        CHECK(ga.at(i, 2) == doctest::Approx(-1.0));
    }
}

TEST_CASE("sigmoid at zero") {
    Tape tape;
    Var x = tape.leaf(Tensor(1, 1, {0.0}));
    Var y = sigmoid(x);
    CHECK(tape.value(y).v[0] == doctest::Approx(0.5));
    tape.backward(sum_all(y));
    CHECK(tape.grad(x).v[0] == doctest::Approx(0.25));
}

TEST_CASE("squared norm gradient is 2W") {
    Tape tape;
    Tensor w0(2, 2, {1.0, -2.0, 0.5, 3.0});
    Var w = tape.leaf(w0);
    tape.backward(sum_all(mul(w, w)));
    for (std::int64_t i = 0; i < w0.size(); ++i)
        CHECK(tape.grad(w).v[i] == doctest::Approx(2.0 * w0.v[i]));
}

TEST_CASE("gather then scatter with one neighbor is the identity") {
    // node 0's list holds only row 1: output row 0 == input row 1
    IndexLists lists;
    lists.offsets = {0, 1};
    lists.indices = {1};
    std::vector<double> w = {0.3, 0.7};
    Tape tape;
    Var h = tape.leaf(Tensor(2, 3, {1, 2, 3, 4, 5, 6}));
    Var out = scatter_weighted_mean(h, lists, w);
    CHECK(tape.value(out).at(0, 0) == doctest::Approx(4.0));
    CHECK(tape.value(out).at(0, 2) == doctest::Approx(6.0));

    auto build = [&](Tape& tp, const std::vector<Var>& vars) {
        Var o = scatter_weighted_mean(vars[0], lists, w);
        return sum_all(mul(o, o));
    };
    Rng rng(3);
    auto res = finite_diff_check(build, {Tensor::randn(2, 3, rng)});
    CHECK(res.max_rel_error < 1e-4);
}

TEST_CASE("shape mismatch names the op") {
    Tape tape;
    Var a = tape.leaf(Tensor(2, 3));
    Var b = tape.leaf(Tensor(2, 3));
    CHECK_THROWS_WITH_AS((void)matmul(a, b), doctest::Contains("matmul"), ShapeError);
    CHECK_THROWS_AS((void)add_row_broadcast(a, b), ShapeError);
}

TEST_CASE("backward contract errors") {
    Tape tape;
    Var x = tape.leaf(Tensor(2, 2));
    CHECK_THROWS_AS(tape.backward(x), ShapeError);  // non-scalar
    Var s = sum_all(x);
    tape.backward(s);
    CHECK_THROWS_AS(tape.backward(s), StateError);  // double backward
}

TEST_CASE("every differentiable op passes randomized finite-difference checks") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        Rng rng(seed);
        const std::int64_t n = 2 + static_cast<std::int64_t>(rng.uniform_int(4));
        const std::int64_t d = 2 + static_cast<std::int64_t>(rng.uniform_int(4));
        Tensor a = Tensor::randn(n, d, rng);
        Tensor b = Tensor::randn(n, d, rng);
        Tensor mmb = Tensor::randn(d, n, rng);
        Tensor row = Tensor::randn(1, d, rng);
        Tensor wcol = Tensor::randn(n, 1, rng);
        Tensor mask = Tensor::randn(n, d, rng);
        // keep kinked ops away from their kink
        for (auto* t : {&a, &b})
            for (auto& x : t->v)
                if (std::fabs(x) < 1e-3) x += 0.1;

        IndexLists lists;
        lists.offsets.push_back(0);
        for (std::int64_t i = 0; i < n; ++i) {
            for (std::int64_t j = 0; j < n; ++j)
                if (rng.uniform() < 0.5) lists.indices.push_back(j);
            lists.offsets.push_back(static_cast<std::int64_t>(lists.indices.size()));
        }
        std::vector<double> sw(static_cast<std::size_t>(n));
        for (auto& x : sw) x = 0.1 + rng.uniform();

        std::vector<std::int64_t> idx;
        for (std::int64_t i = 0; i < n; ++i)
            idx.push_back(static_cast<std::int64_t>(rng.uniform_int(static_cast<std::uint64_t>(n))));

        using Build = std::function<Var(Tape&, const std::vector<Var>&)>;
        const std::vector<std::pair<Build, std::vector<Tensor>>> cases = {
            {[&](Tape&, const std::vector<Var>& v) { return sum_all(matmul(v[0], v[1])); },
             {a, mmb}},
            {[&](Tape&, const std::vector<Var>& v) {
                 return sum_all(mul(transpose(v[0]), transpose(v[0])));
             },
             {a}},
            {[&](Tape&, const std::vector<Var>& v) { return sum_all(mul(add(v[0], v[1]), v[0])); },
             {a, b}},
            {[&](Tape&, const std::vector<Var>& v) { return sum_all(mul(sub(v[0], v[1]), v[1])); },
             {a, b}},
            {[&](Tape&, const std::vector<Var>& v) { return sum_all(scale(v[0], -2.5)); }, {a}},
            {[&](Tape&, const std::vector<Var>& v) { return sum_all(add_scalar(v[0], 3.0)); },
             {a}},
            {[&](Tape&, const std::vector<Var>& v) { return sum_all(mul_const(v[0], mask)); },
             {a}},
            {[&](Tape&, const std::vector<Var>& v) {
                 return sum_all(mul(add_row_broadcast(v[0], v[1]), v[0]));
             },
             {a, row}},
            {[&](Tape&, const std::vector<Var>& v) {
                 return sum_all(mul(scale_rows(v[0], v[1]), v[0]));
             },
             {a, wcol}},
            {[&](Tape&, const std::vector<Var>& v) { return sum_all(sigmoid(v[0])); }, {a}},
            {[&](Tape&, const std::vector<Var>& v) { return sum_all(softplus(v[0])); }, {a}},
            {[&](Tape&, const std::vector<Var>& v) { return sum_all(mul(leaky_relu(v[0]), v[0])); },
             {a}},
            {[&](Tape&, const std::vector<Var>& v) { return sum_all(abs_val(v[0])); }, {a}},
            {[&](Tape&, const std::vector<Var>& v) {
                 return sum_all(mul(concat_cols({v[0], v[1]}), concat_cols({v[1], v[0]})));
             },
             {a, b}},
            {[&](Tape&, const std::vector<Var>& v) { return sum_all(mul(mean_rows(v[0]), mean_rows(v[0]))); },
             {a}},
            {[&](Tape&, const std::vector<Var>& v) { return sum_all(mul(row_sum(v[0]), row_sum(v[0]))); },
             {a}},
            {[&](Tape&, const std::vector<Var>& v) {
                 return sum_all(mul(gather_rows(v[0], idx), gather_rows(v[0], idx)));
             },
             {a}},
            {[&](Tape&, const std::vector<Var>& v) {
                 return sum_all(mul_const(log_softmax_rows(v[0]), mask));
             },
             {a}},
            {[&](Tape&, const std::vector<Var>& v) {
                 Var o = scatter_weighted_mean(v[0], lists, sw);
                 return sum_all(mul(o, o));
             },
             {a}},
        };
        for (const auto& [build, inputs] : cases) {
            const auto res = finite_diff_check(build, inputs);
            CHECK(res.max_rel_error < 1e-4);
        }
    }
}

TEST_CASE("adam zero gradient leaves parameters unchanged") {
    Tensor p(2, 2, {1, 2, 3, 4});
    const Tensor zero = Tensor::zeros(2, 2);
    AdamState st;
    adam_step({&p}, {&zero}, st);
    CHECK(st.step_count == 1);
    CHECK(p.v == Tensor(2, 2, {1, 2, 3, 4}).v);
}

TEST_CASE("adam constant gradient converges to signed step of size lr") {
    Tensor p(1, 1, {0.0});
    Tensor g(1, 1, {0.37});
    AdamState st(AdamConfig{0.01, 0.9, 0.999, 1e-8});
    double prev = 0.0;
    double last_step = 0.0;
    for (int i = 0; i < 1000; ++i) {
        adam_step({&p}, {&g}, st);
        last_step = prev - p.v[0];
        prev = p.v[0];
    }
    CHECK(std::fabs(last_step - st.cfg.lr) < 1e-3);
}

TEST_CASE("adam lr zero is a no-op; NaN gradient fails fast") {
    Tensor p(1, 2, {5.0, -1.0});
    Tensor g(1, 2, {1.0, 2.0});
    AdamState st(AdamConfig{0.0, 0.9, 0.999, 1e-8});
    adam_step({&p}, {&g}, st);
    CHECK(p.v[0] == 5.0);
    CHECK(p.v[1] == -1.0);
    Tensor bad(1, 2, {std::nan(""), 0.0});
    CHECK_THROWS_AS(adam_step({&p}, {&bad}, st), NumericError);
}

TEST_CASE("tape replay determinism") {
    auto run = [] {
        Rng rng(11);
        Tape tape;
        Var x = tape.leaf(Tensor::randn(5, 4, rng));
        Var w = tape.leaf(Tensor::randn(4, 3, rng));
        Var loss = sum_all(mul(sigmoid(matmul(x, w)), sigmoid(matmul(x, w))));
        tape.backward(loss);
        return std::make_pair(tape.value(loss).v[0], tape.grad(w).v);
    };
    const auto a = run();
    const auto b = run();
    CHECK(a.first == b.first);
    CHECK(a.second == b.second);
}
