#include "mimbfd/lcd.hpp"

#include <string>
#include <vector>

namespace mimbfd {

LcdVariant lcd_variant_from_string(const std::string& s) {
    if (s == "sq_outside") return LcdVariant::sq_outside;
    if (s == "sq_inside") return LcdVariant::sq_inside;
    throw ConfigError("lcd.variant must be sq_outside or sq_inside, got '" + s + "'");
}

std::string to_string(LcdVariant v) {
    return v == LcdVariant::sq_outside ? "sq_outside" : "sq_inside";
}

void LcdConfig::validate() const {
    if (lambda1 < 0 || lambda2 < 0) throw ConfigError("lcd: lambda1/lambda2 must be >= 0");
}

LcdState LcdState::init(std::int64_t n_train, std::int64_t p, const LcdConfig& cfg) {
    cfg.validate();
    if (n_train < 2) throw ConfigError("lcd: need at least 2 training rows");
    if (p < 2) throw ConfigError("lcd: need at least 2 representation variables");
    LcdState st;
    // softplus(0.5413...) = 1, so weights start at the mean-one target
    st.u = Tensor::full(n_train, 1, 0.5413248546129181);
    st.gamma = Tensor::full(p - 1, 1, 1.0);
    st.cfg = cfg;
    return st;
}

namespace {

// All pairwise cross-moments as a p x p tensor:
//   C = (H^T diag(w) H)/n - (H^T w / n)(H^T w / n)^T
Var cross_moment_matrix(Var h, Var w) {
    Tape* t = h.tape;
    const Tensor& hv = t->value(h);
    const Tensor& wv = t->value(w);
    if (wv.cols != 1 || wv.rows != hv.rows)
        throw ShapeError("lcd: weights must be " + std::to_string(hv.rows) + "x1, got " +
                         shape_str(wv));
    const double inv_n = 1.0 / static_cast<double>(hv.rows);
    Var ht = transpose(h);
    Var m = scale(matmul(ht, scale_rows(h, w)), inv_n);
    Var a = scale(matmul(ht, w), inv_n);  // p x 1 weighted means
    return sub(m, matmul(a, transpose(a)));
}

Tensor offdiag_mask(std::int64_t p) {
    Tensor mask = Tensor::full(p, p, 1.0);
    for (std::int64_t i = 0; i < p; ++i) mask.at(i, i) = 0.0;
    return mask;
}

// Gamma placed positionally: row m holds gamma_k at the k-th column != m.
// Built from ops so gamma stays trainable.
Var gamma_matrix(Var gamma, std::int64_t p) {
    Tape* t = gamma.tape;
    Var gt = transpose(gamma);  // 1 x (p-1)
    Var zero = t->leaf(Tensor::zeros(1, 1));
    Var left = concat_cols({gt, zero});   // gamma_k at column k
    Var right = concat_cols({zero, gt});  // gamma_{j-1} at column j
    Var ones = t->leaf(Tensor::full(p, 1, 1.0));
    Tensor lower(p, p), strict_upper(p, p);
    for (std::int64_t i = 0; i < p; ++i)
        for (std::int64_t j = 0; j < p; ++j) {
            lower.at(i, j) = i > j ? 1.0 : 0.0;
            strict_upper.at(i, j) = i < j ? 1.0 : 0.0;
        }
    return add(mul_const(matmul(ones, left), lower),
               mul_const(matmul(ones, right), strict_upper));
}

}  // namespace

Var weighted_cov(Var h, Var w, std::int64_t m) {
    Tape* t = h.tape;
    const std::int64_t p = t->value(h).cols;
    if (m < 0 || m >= p) throw IndexError("weighted_cov: column " + std::to_string(m));
    Var c = cross_moment_matrix(h, w);
    Var row_m = transpose(gather_rows(c, {m}));  // p x 1
    std::vector<std::int64_t> keep;
    for (std::int64_t j = 0; j < p; ++j)
        if (j != m) keep.push_back(j);
    return gather_rows(row_m, keep);
}

Var lcd_loss(Var h, Var u, Var gamma, const LcdConfig& cfg) {
    cfg.validate();
    Tape* t = h.tape;
    const Tensor& hv = t->value(h);
    const std::int64_t n = hv.rows, p = hv.cols;
    if (n < 2) throw ShapeError("lcd_loss: need at least 2 rows");
    if (t->value(gamma).rows != p - 1 || t->value(gamma).cols != 1)
        throw ShapeError("lcd_loss: gamma must be " + std::to_string(p - 1) + "x1");

    Var w = softplus(u);
    Var c = mul_const(cross_moment_matrix(h, w), offdiag_mask(p));
    Var gm = gamma_matrix(gamma, p);
    Var decorr{};
    if (cfg.variant == LcdVariant::sq_outside) {
        Var row = row_sum(mul(gm, abs_val(c)));  // p x 1 of gamma-weighted |c_m| sums
        decorr = sum_all(mul(row, row));
    } else {
        decorr = sum_all(mul(gm, mul(c, c)));
    }
    Var reg1 = scale(sum_all(mul(w, w)), cfg.lambda1 / static_cast<double>(n));
    Var mean_dev = add_scalar(scale(sum_all(w), 1.0 / static_cast<double>(n)), -1.0);
    Var reg2 = scale(mul(mean_dev, mean_dev), cfg.lambda2);
    return add(add(decorr, reg1), reg2);
}

void step_weights(LcdState& state, const Tensor& grad_u, AdamState& opt) {
    adam_step({&state.u}, {&grad_u}, opt);
}

}  // namespace mimbfd
