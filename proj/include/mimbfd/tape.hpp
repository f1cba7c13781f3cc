#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "mimbfd/tensor.hpp"

namespace mimbfd {

class Tape;

// Handle to a tape node. Cheap to copy; valid while the tape lives.
struct Var {
    Tape* tape = nullptr;
    int id = -1;
};

// Ragged index structure: row i owns indices[offsets[i] .. offsets[i+1]).
// Used for neighbor lists in the aggregation ops.
struct IndexLists {
    std::vector<std::int64_t> offsets;  // size n+1, monotone
    std::vector<std::int64_t> indices;

    std::int64_t num_rows() const { return static_cast<std::int64_t>(offsets.size()) - 1; }
};

// Reverse-mode tape over dense Tensors. Single-threaded; one backward pass
// per tape. Ops record a closure that scatters the output gradient into the
// input gradients.
class Tape {
public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    Var leaf(Tensor value);

    const Tensor& value(Var x) const { return nodes_[check(x)].value; }
    const Tensor& grad(Var x) const { return nodes_[check(x)].grad; }

    // Seeds d(loss)/d(loss)=1 and runs all recorded closures in reverse.
    // loss must be 1x1; a second call without a new tape is an error.
    void backward(Var loss);

    std::size_t num_nodes() const { return nodes_.size(); }

    // Implementation hooks for the op builders.
    Var push(Tensor value, std::function<void(Tape&)> backprop);
    Tensor& grad_mut(int id) { return nodes_[static_cast<std::size_t>(id)].grad; }
    const Tensor& value_of(int id) const { return nodes_[static_cast<std::size_t>(id)].value; }

private:
    struct Node {
        Tensor value;
        Tensor grad;
        std::function<void(Tape&)> backprop;
    };

    std::size_t check(Var x) const;

    std::vector<Node> nodes_;
    bool backward_done_ = false;
};

// ---- differentiable ops ----------------------------------------------------
// All shape requirements are strict; there is no implicit broadcasting.
// Mismatches throw ShapeError naming the op.

Var matmul(Var a, Var b);
Var transpose(Var a);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);  // elementwise
Var scale(Var a, double s);
Var add_scalar(Var a, double s);
Var mul_const(Var a, const Tensor& m);       // elementwise by a fixed tensor
Var add_row_broadcast(Var a, Var row);       // row is 1xd, added to every row of a
Var scale_rows(Var a, Var w);                // w is nx1; row i of a scaled by w[i]
Var sigmoid(Var a);
Var softplus(Var a);
Var leaky_relu(Var a, double slope = 0.01);
Var abs_val(Var a);
Var concat_cols(const std::vector<Var>& parts);
Var mean_rows(Var a);  // nxd -> 1xd column means
Var row_sum(Var a);    // nxd -> nx1
Var sum_all(Var a);    // -> 1x1
Var gather_rows(Var a, const std::vector<std::int64_t>& idx);
Var log_softmax_rows(Var a);

// Row i of the output is the weighted mean of a's rows listed in lists[i],
// with fixed nonnegative weights w (not differentiated); empty list -> zero
// row. lists and w must outlive the tape.
Var scatter_weighted_mean(Var a, const IndexLists& lists, const std::vector<double>& w);

}  // namespace mimbfd
