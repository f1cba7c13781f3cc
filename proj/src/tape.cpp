#include "mimbfd/tape.hpp"

#include <cmath>
#include <string>

namespace mimbfd {

namespace {

void require(bool ok, const char* op, const std::string& detail) {
    if (!ok) throw ShapeError(std::string(op) + ": " + detail);
}

Tape* same_tape(Var a, Var b, const char* op) {
    if (a.tape == nullptr || a.tape != b.tape)
        throw StateError(std::string(op) + ": operands belong to different tapes");
    return a.tape;
}

// out += a * b, row-major ikj order.
void matmul_acc(const Tensor& a, const Tensor& b, Tensor& out) {
    const std::int64_t n = a.rows, k = a.cols, m = b.cols;
    for (std::int64_t i = 0; i < n; ++i) {
        const double* arow = a.v.data() + i * k;
        double* orow = out.v.data() + i * m;
        for (std::int64_t p = 0; p < k; ++p) {
            const double aip = arow[p];
            if (aip == 0.0) continue;
            const double* brow = b.v.data() + p * m;
            for (std::int64_t j = 0; j < m; ++j) orow[j] += aip * brow[j];
        }
    }
}

// out += a * b^T  (a: n x k, b: m x k, out: n x m)
void matmul_bt_acc(const Tensor& a, const Tensor& b, Tensor& out) {
    const std::int64_t n = a.rows, k = a.cols, m = b.rows;
    for (std::int64_t i = 0; i < n; ++i) {
        const double* arow = a.v.data() + i * k;
        double* orow = out.v.data() + i * m;
        for (std::int64_t j = 0; j < m; ++j) {
            const double* brow = b.v.data() + j * k;
            double s = 0.0;
            for (std::int64_t p = 0; p < k; ++p) s += arow[p] * brow[p];
            orow[j] += s;
        }
    }
}

// out += a^T * b  (a: n x k, b: n x m, out: k x m)
void matmul_at_acc(const Tensor& a, const Tensor& b, Tensor& out) {
    const std::int64_t n = a.rows, k = a.cols, m = b.cols;
    for (std::int64_t i = 0; i < n; ++i) {
        const double* arow = a.v.data() + i * k;
        const double* brow = b.v.data() + i * m;
        for (std::int64_t p = 0; p < k; ++p) {
            const double aip = arow[p];
            if (aip == 0.0) continue;
            double* orow = out.v.data() + p * m;
            for (std::int64_t j = 0; j < m; ++j) orow[j] += aip * brow[j];
        }
    }
}

// Elementwise unary op: f(value) forward, df(value, out_value) for the local
// derivative evaluated per element.
template <typename Fwd, typename Dfn>
Var unary_elementwise(Var a, Fwd fwd, Dfn dfn) {
    Tape* t = a.tape;
    const Tensor& av = t->value_of(a.id);
    Tensor out(av.rows, av.cols);
    for (std::int64_t i = 0; i < av.size(); ++i) out.v[i] = fwd(av.v[i]);
    const int aid = a.id;
    const int oid = static_cast<int>(t->num_nodes());
    return t->push(std::move(out), [aid, oid, dfn](Tape& tp) {
        const Tensor& g = tp.grad_mut(oid);
        const Tensor& x = tp.value_of(aid);
        const Tensor& y = tp.value_of(oid);
        Tensor& ga = tp.grad_mut(aid);
        for (std::int64_t i = 0; i < g.size(); ++i)
            ga.v[i] += g.v[i] * dfn(x.v[i], y.v[i]);
    });
}

}  // namespace

std::size_t Tape::check(Var x) const {
    if (x.tape != this || x.id < 0 || static_cast<std::size_t>(x.id) >= nodes_.size())
        throw StateError("Tape: variable does not belong to this tape");
    return static_cast<std::size_t>(x.id);
}

Var Tape::leaf(Tensor value) {
    return push(std::move(value), nullptr);
}

Var Tape::push(Tensor value, std::function<void(Tape&)> backprop) {
    Node node;
    node.grad = Tensor::zeros(value.rows, value.cols);
    node.value = std::move(value);
    node.backprop = std::move(backprop);
    nodes_.push_back(std::move(node));
    return Var{this, static_cast<int>(nodes_.size() - 1)};
}

void Tape::backward(Var loss) {
    const std::size_t root = check(loss);
    if (nodes_[root].value.size() != 1)
        throw ShapeError("backward: loss must be a 1x1 scalar, got " +
                         shape_str(nodes_[root].value));
    if (backward_done_)
        throw StateError("backward: tape already differentiated; build a new tape");
    backward_done_ = true;
    nodes_[root].grad.v[0] = 1.0;
    for (std::size_t i = nodes_.size(); i-- > 0;) {
        if (nodes_[i].backprop) nodes_[i].backprop(*this);
    }
}

Var matmul(Var a, Var b) {
    Tape* t = same_tape(a, b, "matmul");
    const Tensor& av = t->value_of(a.id);
    const Tensor& bv = t->value_of(b.id);
    require(av.cols == bv.rows, "matmul",
            shape_str(av) + " x " + shape_str(bv) + " incompatible");
    Tensor out(av.rows, bv.cols);
    matmul_acc(av, bv, out);
    const int aid = a.id, bid = b.id;
    const int oid = static_cast<int>(t->num_nodes());
    return t->push(std::move(out), [aid, bid, oid](Tape& tp) {
        const Tensor& g = tp.grad_mut(oid);
        matmul_bt_acc(g, tp.value_of(bid), tp.grad_mut(aid));   // dA += g B^T
        matmul_at_acc(tp.value_of(aid), g, tp.grad_mut(bid));   // dB += A^T g
    });
}

Var transpose(Var a) {
    Tape* t = a.tape;
    const Tensor& av = t->value_of(a.id);
    Tensor out(av.cols, av.rows);
    for (std::int64_t i = 0; i < av.rows; ++i)
        for (std::int64_t j = 0; j < av.cols; ++j) out.at(j, i) = av.at(i, j);
    const int aid = a.id;
    const int oid = static_cast<int>(t->num_nodes());
    return t->push(std::move(out), [aid, oid](Tape& tp) {
        const Tensor& g = tp.grad_mut(oid);
        Tensor& ga = tp.grad_mut(aid);
        for (std::int64_t i = 0; i < g.rows; ++i)
            for (std::int64_t j = 0; j < g.cols; ++j) ga.at(j, i) += g.at(i, j);
    });
}

Var add(Var a, Var b) {
    Tape* t = same_tape(a, b, "add");
    const Tensor& av = t->value_of(a.id);
    const Tensor& bv = t->value_of(b.id);
    require(av.same_shape(bv), "add", shape_str(av) + " vs " + shape_str(bv));
    Tensor out = av;
    for (std::int64_t i = 0; i < out.size(); ++i) out.v[i] += bv.v[i];
    const int aid = a.id, bid = b.id;
    const int oid = static_cast<int>(t->num_nodes());
    return t->push(std::move(out), [aid, bid, oid](Tape& tp) {
        const Tensor& g = tp.grad_mut(oid);
        Tensor& ga = tp.grad_mut(aid);
        Tensor& gb = tp.grad_mut(bid);
        for (std::int64_t i = 0; i < g.size(); ++i) {
            ga.v[i] += g.v[i];
            gb.v[i] += g.v[i];
        }
    });
}

Var sub(Var a, Var b) {
    Tape* t = same_tape(a, b, "sub");
    const Tensor& av = t->value_of(a.id);
    const Tensor& bv = t->value_of(b.id);
    require(av.same_shape(bv), "sub", shape_str(av) + " vs " + shape_str(bv));
    Tensor out = av;
    for (std::int64_t i = 0; i < out.size(); ++i) out.v[i] -= bv.v[i];
    const int aid = a.id, bid = b.id;
    const int oid = static_cast<int>(t->num_nodes());
    return t->push(std::move(out), [aid, bid, oid](Tape& tp) {
        const Tensor& g = tp.grad_mut(oid);
        Tensor& ga = tp.grad_mut(aid);
        Tensor& gb = tp.grad_mut(bid);
        for (std::int64_t i = 0; i < g.size(); ++i) {
            ga.v[i] += g.v[i];
            gb.v[i] -= g.v[i];
        }
    });
}

Var mul(Var a, Var b) {
    Tape* t = same_tape(a, b, "mul");
    const Tensor& av = t->value_of(a.id);
    const Tensor& bv = t->value_of(b.id);
    require(av.same_shape(bv), "mul", shape_str(av) + " vs " + shape_str(bv));
    Tensor out = av;
    for (std::int64_t i = 0; i < out.size(); ++i) out.v[i] *= bv.v[i];
    const int aid = a.id, bid = b.id;
    const int oid = static_cast<int>(t->num_nodes());
    return t->push(std::move(out), [aid, bid, oid](Tape& tp) {
        const Tensor& g = tp.grad_mut(oid);
        const Tensor& x = tp.value_of(aid);
        const Tensor& y = tp.value_of(bid);
        Tensor& ga = tp.grad_mut(aid);
        Tensor& gb = tp.grad_mut(bid);
        for (std::int64_t i = 0; i < g.size(); ++i) {
            ga.v[i] += g.v[i] * y.v[i];
            gb.v[i] += g.v[i] * x.v[i];
        }
    });
}

Var scale(Var a, double s) {
    return unary_elementwise(
        a, [s](double x) { return x * s; }, [s](double, double) { return s; });
}

Var add_scalar(Var a, double s) {
    return unary_elementwise(
        a, [s](double x) { return x + s; }, [](double, double) { return 1.0; });
}

Var mul_const(Var a, const Tensor& m) {
    Tape* t = a.tape;
    const Tensor& av = t->value_of(a.id);
    require(av.same_shape(m), "mul_const", shape_str(av) + " vs " + shape_str(m));
    Tensor out = av;
    for (std::int64_t i = 0; i < out.size(); ++i) out.v[i] *= m.v[i];
    const int aid = a.id;
    const int oid = static_cast<int>(t->num_nodes());
    Tensor mask = m;  // copy; the tape owns its constants
    return t->push(std::move(out), [aid, oid, mask = std::move(mask)](Tape& tp) {
        const Tensor& g = tp.grad_mut(oid);
        Tensor& ga = tp.grad_mut(aid);
        for (std::int64_t i = 0; i < g.size(); ++i) ga.v[i] += g.v[i] * mask.v[i];
    });
}

Var add_row_broadcast(Var a, Var row) {
    Tape* t = same_tape(a, row, "add_row_broadcast");
    const Tensor& av = t->value_of(a.id);
    const Tensor& rv = t->value_of(row.id);
    require(rv.rows == 1 && rv.cols == av.cols, "add_row_broadcast",
            "row must be 1x" + std::to_string(av.cols) + ", got " + shape_str(rv));
    Tensor out = av;
    for (std::int64_t i = 0; i < av.rows; ++i)
        for (std::int64_t j = 0; j < av.cols; ++j) out.at(i, j) += rv.v[static_cast<std::size_t>(j)];
    const int aid = a.id, rid = row.id;
    const int oid = static_cast<int>(t->num_nodes());
    return t->push(std::move(out), [aid, rid, oid](Tape& tp) {
        const Tensor& g = tp.grad_mut(oid);
        Tensor& ga = tp.grad_mut(aid);
        Tensor& gr = tp.grad_mut(rid);
        for (std::int64_t i = 0; i < g.rows; ++i)
            for (std::int64_t j = 0; j < g.cols; ++j) {
                ga.at(i, j) += g.at(i, j);
                gr.v[static_cast<std::size_t>(j)] += g.at(i, j);
            }
    });
}

Var scale_rows(Var a, Var w) {
    Tape* t = same_tape(a, w, "scale_rows");
    const Tensor& av = t->value_of(a.id);
    const Tensor& wv = t->value_of(w.id);
    require(wv.cols == 1 && wv.rows == av.rows, "scale_rows",
            "weights must be " + std::to_string(av.rows) + "x1, got " + shape_str(wv));
    Tensor out = av;
    for (std::int64_t i = 0; i < av.rows; ++i) {
        const double wi = wv.v[static_cast<std::size_t>(i)];
        for (std::int64_t j = 0; j < av.cols; ++j) out.at(i, j) *= wi;
    }
    const int aid = a.id, wid = w.id;
    const int oid = static_cast<int>(t->num_nodes());
    return t->push(std::move(out), [aid, wid, oid](Tape& tp) {
        const Tensor& g = tp.grad_mut(oid);
        const Tensor& x = tp.value_of(aid);
        const Tensor& wv2 = tp.value_of(wid);
        Tensor& ga = tp.grad_mut(aid);
        Tensor& gw = tp.grad_mut(wid);
        for (std::int64_t i = 0; i < g.rows; ++i) {
            const double wi = wv2.v[static_cast<std::size_t>(i)];
            double acc = 0.0;
            for (std::int64_t j = 0; j < g.cols; ++j) {
                ga.at(i, j) += g.at(i, j) * wi;
                acc += g.at(i, j) * x.at(i, j);
            }
            gw.v[static_cast<std::size_t>(i)] += acc;
        }
    });
}

Var sigmoid(Var a) {
    return unary_elementwise(
        a,
        [](double x) { return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x))
                                       : std::exp(x) / (1.0 + std::exp(x)); },
        [](double, double y) { return y * (1.0 - y); });
}

Var softplus(Var a) {
    // log(1+e^x), stable form x+log1p(e^-x) for x>0.
    return unary_elementwise(
        a,
        [](double x) { return x > 0.0 ? x + std::log1p(std::exp(-x))
                                      : std::log1p(std::exp(x)); },
        [](double x, double) { return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x))
                                               : std::exp(x) / (1.0 + std::exp(x)); });
}

Var leaky_relu(Var a, double slope) {
    return unary_elementwise(
        a, [slope](double x) { return x >= 0.0 ? x : slope * x; },
        [slope](double x, double) { return x >= 0.0 ? 1.0 : slope; });
}

Var abs_val(Var a) {
    // subgradient 0 at the kink
    return unary_elementwise(
        a, [](double x) { return std::fabs(x); },
        [](double x, double) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); });
}

Var concat_cols(const std::vector<Var>& parts) {
    if (parts.empty()) throw ShapeError("concat_cols: empty input list");
    Tape* t = parts[0].tape;
    const std::int64_t n = t->value_of(parts[0].id).rows;
    std::int64_t total = 0;
    for (Var p : parts) {
        same_tape(parts[0], p, "concat_cols");
        const Tensor& pv = t->value_of(p.id);
        require(pv.rows == n, "concat_cols",
                "all parts need " + std::to_string(n) + " rows, got " + shape_str(pv));
        total += pv.cols;
    }
    Tensor out(n, total);
    std::vector<int> ids;
    std::vector<std::int64_t> col_off;
    std::int64_t off = 0;
    for (Var p : parts) {
        const Tensor& pv = t->value_of(p.id);
        for (std::int64_t i = 0; i < n; ++i)
            for (std::int64_t j = 0; j < pv.cols; ++j) out.at(i, off + j) = pv.at(i, j);
        ids.push_back(p.id);
        col_off.push_back(off);
        off += pv.cols;
    }
    const int oid = static_cast<int>(t->num_nodes());
    return t->push(std::move(out), [ids, col_off, oid](Tape& tp) {
        const Tensor& g = tp.grad_mut(oid);
        for (std::size_t k = 0; k < ids.size(); ++k) {
            Tensor& gp = tp.grad_mut(ids[k]);
            for (std::int64_t i = 0; i < gp.rows; ++i)
                for (std::int64_t j = 0; j < gp.cols; ++j)
                    gp.at(i, j) += g.at(i, col_off[k] + j);
        }
    });
}

Var mean_rows(Var a) {
    Tape* t = a.tape;
    const Tensor& av = t->value_of(a.id);
    require(av.rows > 0, "mean_rows", "empty input");
    Tensor out(1, av.cols);
    for (std::int64_t i = 0; i < av.rows; ++i)
        for (std::int64_t j = 0; j < av.cols; ++j) out.v[static_cast<std::size_t>(j)] += av.at(i, j);
    const double inv = 1.0 / static_cast<double>(av.rows);
    for (auto& x : out.v) x *= inv;
    const int aid = a.id;
    const int oid = static_cast<int>(t->num_nodes());
    return t->push(std::move(out), [aid, oid, inv](Tape& tp) {
        const Tensor& g = tp.grad_mut(oid);
        Tensor& ga = tp.grad_mut(aid);
        for (std::int64_t i = 0; i < ga.rows; ++i)
            for (std::int64_t j = 0; j < ga.cols; ++j)
                ga.at(i, j) += g.v[static_cast<std::size_t>(j)] * inv;
    });
}

Var row_sum(Var a) {
    Tape* t = a.tape;
    const Tensor& av = t->value_of(a.id);
    Tensor out(av.rows, 1);
    for (std::int64_t i = 0; i < av.rows; ++i) {
        double s = 0.0;
        for (std::int64_t j = 0; j < av.cols; ++j) s += av.at(i, j);
        out.v[static_cast<std::size_t>(i)] = s;
    }
    const int aid = a.id;
    const int oid = static_cast<int>(t->num_nodes());
    return t->push(std::move(out), [aid, oid](Tape& tp) {
        const Tensor& g = tp.grad_mut(oid);
        Tensor& ga = tp.grad_mut(aid);
        for (std::int64_t i = 0; i < ga.rows; ++i)
            for (std::int64_t j = 0; j < ga.cols; ++j)
                ga.at(i, j) += g.v[static_cast<std::size_t>(i)];
    });
}

Var sum_all(Var a) {
    Tape* t = a.tape;
    const Tensor& av = t->value_of(a.id);
    Tensor out(1, 1);
    double s = 0.0;
    for (double x : av.v) s += x;
    out.v[0] = s;
    const int aid = a.id;
    const int oid = static_cast<int>(t->num_nodes());
    return t->push(std::move(out), [aid, oid](Tape& tp) {
        const double g = tp.grad_mut(oid).v[0];
        Tensor& ga = tp.grad_mut(aid);
        for (auto& x : ga.v) x += g;
    });
}

Var gather_rows(Var a, const std::vector<std::int64_t>& idx) {
    Tape* t = a.tape;
    const Tensor& av = t->value_of(a.id);
    for (std::int64_t i : idx)
        if (i < 0 || i >= av.rows)
            throw IndexError("gather_rows: row " + std::to_string(i) + " out of range 0.." +
                             std::to_string(av.rows - 1));
    Tensor out(static_cast<std::int64_t>(idx.size()), av.cols);
    for (std::size_t k = 0; k < idx.size(); ++k)
        for (std::int64_t j = 0; j < av.cols; ++j)
            out.at(static_cast<std::int64_t>(k), j) = av.at(idx[k], j);
    const int aid = a.id;
    const int oid = static_cast<int>(t->num_nodes());
    std::vector<std::int64_t> rows = idx;
    return t->push(std::move(out), [aid, oid, rows = std::move(rows)](Tape& tp) {
        const Tensor& g = tp.grad_mut(oid);
        Tensor& ga = tp.grad_mut(aid);
        for (std::size_t k = 0; k < rows.size(); ++k)
            for (std::int64_t j = 0; j < g.cols; ++j)
                ga.at(rows[k], j) += g.at(static_cast<std::int64_t>(k), j);
    });
}

Var log_softmax_rows(Var a) {
    Tape* t = a.tape;
    const Tensor& av = t->value_of(a.id);
    Tensor out(av.rows, av.cols);
    for (std::int64_t i = 0; i < av.rows; ++i) {
        double mx = av.at(i, 0);
        for (std::int64_t j = 1; j < av.cols; ++j) mx = std::max(mx, av.at(i, j));
        double lse = 0.0;
        for (std::int64_t j = 0; j < av.cols; ++j) lse += std::exp(av.at(i, j) - mx);
        lse = mx + std::log(lse);
        for (std::int64_t j = 0; j < av.cols; ++j) out.at(i, j) = av.at(i, j) - lse;
    }
    const int aid = a.id;
    const int oid = static_cast<int>(t->num_nodes());
    return t->push(std::move(out), [aid, oid](Tape& tp) {
        // dx = dy - softmax(x) * rowsum(dy)
        const Tensor& g = tp.grad_mut(oid);
        const Tensor& y = tp.value_of(oid);
        Tensor& ga = tp.grad_mut(aid);
        for (std::int64_t i = 0; i < g.rows; ++i) {
            double gsum = 0.0;
            for (std::int64_t j = 0; j < g.cols; ++j) gsum += g.at(i, j);
            for (std::int64_t j = 0; j < g.cols; ++j)
                ga.at(i, j) += g.at(i, j) - std::exp(y.at(i, j)) * gsum;
        }
    });
}

Var scatter_weighted_mean(Var a, const IndexLists& lists, const std::vector<double>& w) {
    Tape* t = a.tape;
    const Tensor& av = t->value_of(a.id);
    const std::int64_t n_out = lists.num_rows();
    if (static_cast<std::int64_t>(w.size()) != av.rows)
        throw ShapeError("scatter_weighted_mean: weight vector length " +
                         std::to_string(w.size()) + " vs " + std::to_string(av.rows) + " rows");
    Tensor out(n_out, av.cols);
    // Per-row normalizers are fixed by lists and w; cache for backward.
    std::vector<double> inv_mass(static_cast<std::size_t>(n_out), 0.0);
    for (std::int64_t i = 0; i < n_out; ++i) {
        double mass = 0.0;
        for (std::int64_t e = lists.offsets[i]; e < lists.offsets[i + 1]; ++e)
            mass += w[static_cast<std::size_t>(lists.indices[e])];
        if (mass > 0.0) inv_mass[static_cast<std::size_t>(i)] = 1.0 / mass;
    }
    for (std::int64_t i = 0; i < n_out; ++i) {
        const double im = inv_mass[static_cast<std::size_t>(i)];
        if (im == 0.0) continue;  // empty or zero-mass list -> zero row
        double* orow = out.v.data() + i * av.cols;
        for (std::int64_t e = lists.offsets[i]; e < lists.offsets[i + 1]; ++e) {
            const std::int64_t j = lists.indices[e];
            const double c = w[static_cast<std::size_t>(j)] * im;
            const double* arow = av.v.data() + j * av.cols;
            for (std::int64_t col = 0; col < av.cols; ++col) orow[col] += c * arow[col];
        }
    }
    const int aid = a.id;
    const int oid = static_cast<int>(t->num_nodes());
    const IndexLists* lp = &lists;
    const std::vector<double>* wp = &w;
    return t->push(std::move(out),
                   [aid, oid, lp, wp, inv_mass = std::move(inv_mass)](Tape& tp) {
        const Tensor& g = tp.grad_mut(oid);
        Tensor& ga = tp.grad_mut(aid);
        for (std::int64_t i = 0; i < g.rows; ++i) {
            const double im = inv_mass[static_cast<std::size_t>(i)];
            if (im == 0.0) continue;
            const double* grow = g.v.data() + i * g.cols;
            for (std::int64_t e = lp->offsets[i]; e < lp->offsets[i + 1]; ++e) {
                const std::int64_t j = lp->indices[e];
                const double c = (*wp)[static_cast<std::size_t>(j)] * im;
                double* garow = ga.v.data() + j * g.cols;
                for (std::int64_t col = 0; col < g.cols; ++col) garow[col] += c * grow[col];
            }
        }
    });
}

}  // namespace mimbfd
