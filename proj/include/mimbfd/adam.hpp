#pragma once

#include <cstdint>
#include <vector>

#include "mimbfd/tensor.hpp"

namespace mimbfd {

struct AdamConfig {
    double lr = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Per-parameter first/second moment buffers plus the shared step count.
// Buffers are allocated on the first step and must keep matching shapes.
struct AdamState {
    AdamConfig cfg;
    std::int64_t step_count = 0;
    std::vector<Tensor> m;
    std::vector<Tensor> v;

    explicit AdamState(AdamConfig c = {}) : cfg(c) {}
};

// Standard Adam update with bias correction. Fails fast on NaN gradients.
void adam_step(const std::vector<Tensor*>& params,
               const std::vector<const Tensor*>& grads, AdamState& state);

}  // namespace mimbfd
