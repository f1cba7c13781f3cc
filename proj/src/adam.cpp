#include "mimbfd/adam.hpp"

#include <cmath>
#include <string>

namespace mimbfd {

void adam_step(const std::vector<Tensor*>& params,
               const std::vector<const Tensor*>& grads, AdamState& state) {
    if (params.size() != grads.size())
        throw ShapeError("adam_step: " + std::to_string(params.size()) + " params vs " +
                         std::to_string(grads.size()) + " grads");
    if (state.m.empty()) {
        for (const Tensor* p : params) {
            state.m.emplace_back(Tensor::zeros(p->rows, p->cols));
            state.v.emplace_back(Tensor::zeros(p->rows, p->cols));
        }
    }
    if (state.m.size() != params.size())
        throw ShapeError("adam_step: state tracks " + std::to_string(state.m.size()) +
                         " params, got " + std::to_string(params.size()));

    state.step_count += 1;
    const double b1 = state.cfg.beta1, b2 = state.cfg.beta2;
    const double bc1 = 1.0 - std::pow(b1, static_cast<double>(state.step_count));
    const double bc2 = 1.0 - std::pow(b2, static_cast<double>(state.step_count));

    for (std::size_t k = 0; k < params.size(); ++k) {
        Tensor& p = *params[k];
        const Tensor& g = *grads[k];
        if (!p.same_shape(g) || !p.same_shape(state.m[k]))
            throw ShapeError("adam_step: parameter " + std::to_string(k) + " shape " +
                             shape_str(p) + " vs grad " + shape_str(g));
        Tensor& m = state.m[k];
        Tensor& v = state.v[k];
        for (std::int64_t i = 0; i < p.size(); ++i) {
            const double gi = g.v[i];
            if (std::isnan(gi))
                throw NumericError("adam_step: NaN gradient in parameter " + std::to_string(k));
            m.v[i] = b1 * m.v[i] + (1.0 - b1) * gi;
            v.v[i] = b2 * v.v[i] + (1.0 - b2) * gi * gi;
            const double mhat = m.v[i] / bc1;
            const double vhat = v.v[i] / bc2;
            p.v[i] -= state.cfg.lr * mhat / (std::sqrt(vhat) + state.cfg.eps);
        }
    }
}

}  // namespace mimbfd
