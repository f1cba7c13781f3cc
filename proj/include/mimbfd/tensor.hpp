#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mimbfd/errors.hpp"
#include "mimbfd/rng.hpp"

namespace mimbfd {

// Dense row-major 2-D array of 64-bit reals. The unit of all numeric work;
// gradient tracking lives in Tape, not here.
struct Tensor {
    std::int64_t rows = 0;
    std::int64_t cols = 0;
    std::vector<double> v;

    Tensor() = default;
    Tensor(std::int64_t r, std::int64_t c)
        : rows(r), cols(c), v(static_cast<std::size_t>(r * c), 0.0) {}
    Tensor(std::int64_t r, std::int64_t c, std::vector<double> data)
        : rows(r), cols(c), v(std::move(data)) {
        if (static_cast<std::int64_t>(v.size()) != r * c)
            throw ShapeError("Tensor: data length " + std::to_string(v.size()) +
                             " does not match shape " + std::to_string(r) + "x" +
                             std::to_string(c));
    }

    double& at(std::int64_t i, std::int64_t j) { return v[static_cast<std::size_t>(i * cols + j)]; }
    double at(std::int64_t i, std::int64_t j) const { return v[static_cast<std::size_t>(i * cols + j)]; }

    std::int64_t size() const { return rows * cols; }
    bool same_shape(const Tensor& o) const { return rows == o.rows && cols == o.cols; }

    static Tensor zeros(std::int64_t r, std::int64_t c) { return Tensor(r, c); }

    static Tensor full(std::int64_t r, std::int64_t c, double value) {
        Tensor t(r, c);
        std::fill(t.v.begin(), t.v.end(), value);
        return t;
    }

    static Tensor randn(std::int64_t r, std::int64_t c, Rng& rng, double stddev = 1.0) {
        Tensor t(r, c);
        for (auto& x : t.v) x = rng.normal() * stddev;
        return t;
    }

    bool all_finite() const {
        for (double x : v)
            if (!std::isfinite(x)) return false;
        return true;
    }
};

inline std::string shape_str(const Tensor& t) {
    return std::to_string(t.rows) + "x" + std::to_string(t.cols);
}

}  // namespace mimbfd
