#pragma once

#include <cstdint>
#include <string>

#include "mimbfd/adam.hpp"
#include "mimbfd/tape.hpp"

namespace mimbfd {

enum class LcdVariant {
    sq_outside,  // sum_m (gamma . |c_m|)^2
    sq_inside,   // sum_m gamma . (c_m)^2
};

LcdVariant lcd_variant_from_string(const std::string& s);
std::string to_string(LcdVariant v);

struct LcdConfig {
    bool enabled = true;
    double lambda1 = 0.1;  // weight magnitude regularizer
    double lambda2 = 1.0;  // keeps mean weight near 1
    bool gamma_trainable = false;
    LcdVariant variant = LcdVariant::sq_outside;

    void validate() const;
};

// Trainable state: unconstrained u with effective weights w = softplus(u) > 0,
// plus per-variable emphasis gamma (p-1 entries, all ones unless trained).
struct LcdState {
    Tensor u;      // n_train x 1
    Tensor gamma;  // (p-1) x 1
    LcdConfig cfg;

    static LcdState init(std::int64_t n_train, std::int64_t p, const LcdConfig& cfg);
};

// Weighted cross-moment of column m against every other column:
//   c_m = (H_m^T diag(w) H_-m)/n - (H_m^T w / n) * (H_-m^T w / n)
// Returned as a (p-1) x 1 tensor, differentiable in H and w.
Var weighted_cov(Var h, Var w, std::int64_t m);

// Full decorrelation objective:
//   sum_m (gamma . |c_m|)^2  +  (lambda1/n) sum w_i^2  +  lambda2 (mean(w)-1)^2
// h is the final-layer representation restricted to training rows; u and
// gamma are the tape leaves for the LcdState tensors.
Var lcd_loss(Var h, Var u, Var gamma, const LcdConfig& cfg);

// Spec'd update entry point: u moves by the shared optimizer; positivity of
// w holds by the softplus parameterization, never by projection.
void step_weights(LcdState& state, const Tensor& grad_u, AdamState& opt);

}  // namespace mimbfd
