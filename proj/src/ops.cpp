#include "mignn/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mignn {

namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (!a.same_shape(b))
        throw ShapeError(std::string(op) + ": operand shapes differ");
}

void require_2d(const Tensor& a, const char* op) {
    if (a.ndim() != 2) throw ShapeError(std::string(op) + ": expected a 2-d tensor");
}

Tensor emit(const char* op, std::vector<std::size_t> shape, std::vector<double> data,
            const std::vector<const Tensor*>& inputs, BackwardFn bw) {
    if (Tape* t = Tape::active())
        return t->record(op, std::move(shape), std::move(data), inputs, std::move(bw));
    return Tensor(std::move(shape), std::move(data));
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "add");
    std::vector<double> out(a.numel());
    const auto& x = a.data();
    const auto& y = b.data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] + y[i];
    return emit("add", a.shape(), std::move(out), {&a, &b},
                [](const Tensor& g, const Tensor&) { return std::vector<Tensor>{g, g}; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "sub");
    std::vector<double> out(a.numel());
    const auto& x = a.data();
    const auto& y = b.data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] - y[i];
    return emit("sub", a.shape(), std::move(out), {&a, &b},
                [](const Tensor& g, const Tensor&) { return std::vector<Tensor>{g, neg(g)}; });
}

Tensor hadamard(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "hadamard");
    std::vector<double> out(a.numel());
    const auto& x = a.data();
    const auto& y = b.data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] * y[i];
    return emit("hadamard", a.shape(), std::move(out), {&a, &b},
                [a, b](const Tensor& g, const Tensor&) {
                    return std::vector<Tensor>{hadamard(g, b), hadamard(g, a)};
                });
}

Tensor divide(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "divide");
    std::vector<double> out(a.numel());
    const auto& x = a.data();
    const auto& y = b.data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] / y[i];
    return emit("divide", a.shape(), std::move(out), {&a, &b},
                [b](const Tensor& g, const Tensor& y_out) {
                    Tensor ga = divide(g, b);
                    Tensor gb = neg(hadamard(ga, y_out));
                    return std::vector<Tensor>{ga, gb};
                });
}

Tensor scale(const Tensor& a, double c) {
    std::vector<double> out(a.numel());
    const auto& x = a.data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] * c;
    return emit("scale", a.shape(), std::move(out), {&a},
                [c](const Tensor& g, const Tensor&) { return std::vector<Tensor>{scale(g, c)}; });
}

Tensor neg(const Tensor& a) { return scale(a, -1.0); }

Tensor leaky_relu(const Tensor& a, double slope) {
    std::vector<double> out(a.numel());
    std::vector<double> mask(a.numel());
    const auto& x = a.data();
    for (std::size_t i = 0; i < out.size(); ++i) {
        const bool pos = x[i] >= 0.0;
        out[i] = pos ? x[i] : slope * x[i];
        mask[i] = pos ? 1.0 : slope;
    }
    Tensor mask_t(a.shape(), std::move(mask));
    return emit("leaky_relu", a.shape(), std::move(out), {&a},
                [mask_t](const Tensor& g, const Tensor&) {
                    return std::vector<Tensor>{hadamard(g, mask_t)};
                });
}

Tensor sigmoid(const Tensor& a) {
    std::vector<double> out(a.numel());
    const auto& x = a.data();
    for (std::size_t i = 0; i < out.size(); ++i) {
        // evaluate through exp of a negative argument only
        if (x[i] >= 0.0) {
            out[i] = 1.0 / (1.0 + std::exp(-x[i]));
        } else {
            const double e = std::exp(x[i]);
            out[i] = e / (1.0 + e);
        }
    }
    return emit("sigmoid", a.shape(), std::move(out), {&a},
                [](const Tensor& g, const Tensor& y) {
                    Tensor ones = Tensor::full(y.shape(), 1.0);
                    return std::vector<Tensor>{hadamard(g, hadamard(y, sub(ones, y)))};
                });
}

Tensor tanh(const Tensor& a) {
    std::vector<double> out(a.numel());
    const auto& x = a.data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::tanh(x[i]);
    return emit("tanh", a.shape(), std::move(out), {&a},
                [](const Tensor& g, const Tensor& y) {
                    Tensor ones = Tensor::full(y.shape(), 1.0);
                    return std::vector<Tensor>{hadamard(g, sub(ones, hadamard(y, y)))};
                });
}

Tensor exp(const Tensor& a) {
    std::vector<double> out(a.numel());
    const auto& x = a.data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::exp(x[i]);
    return emit("exp", a.shape(), std::move(out), {&a},
                [](const Tensor& g, const Tensor& y) {
                    return std::vector<Tensor>{hadamard(g, y)};
                });
}

Tensor softplus(const Tensor& a) {
    std::vector<double> out(a.numel());
    const auto& x = a.data();
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = x[i] > 0.0 ? x[i] + std::log1p(std::exp(-x[i])) : std::log1p(std::exp(x[i]));
    }
    return emit("softplus", a.shape(), std::move(out), {&a},
                [a](const Tensor& g, const Tensor&) {
                    return std::vector<Tensor>{hadamard(g, sigmoid(a))};
                });
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    require_2d(a, "matmul");
    require_2d(b, "matmul");
    const std::size_t m = a.shape()[0], k = a.shape()[1];
    const std::size_t k2 = b.shape()[0], n = b.shape()[1];
    if (k != k2)
        throw ShapeError("matmul: inner dimensions " + std::to_string(k) + " and " +
                         std::to_string(k2) + " disagree");
    std::vector<double> out(m * n, 0.0);
    const auto& x = a.data();
    const auto& y = b.data();
    // i-k-j order: each out entry accumulates in ascending k, matching spmm
    for (std::size_t i = 0; i < m; ++i) {
        double* orow = out.data() + i * n;
        const double* xrow = x.data() + i * k;
        for (std::size_t kk = 0; kk < k; ++kk) {
            const double v = xrow[kk];
            const double* yrow = y.data() + kk * n;
            for (std::size_t j = 0; j < n; ++j) orow[j] += v * yrow[j];
        }
    }
    return emit("matmul", {m, n}, std::move(out), {&a, &b},
                [a, b](const Tensor& g, const Tensor&) {
                    return std::vector<Tensor>{matmul(g, transpose(b)), matmul(transpose(a), g)};
                });
}

Tensor transpose(const Tensor& a) {
    require_2d(a, "transpose");
    const std::size_t m = a.shape()[0], n = a.shape()[1];
    std::vector<double> out(m * n);
    const auto& x = a.data();
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) out[j * m + i] = x[i * n + j];
    return emit("transpose", {n, m}, std::move(out), {&a},
                [](const Tensor& g, const Tensor&) { return std::vector<Tensor>{transpose(g)}; });
}

Tensor spmm(const SparseMatrix& s, const Tensor& d) {
    require_2d(d, "spmm");
    if (s.cols != d.shape()[0])
        throw ShapeError("spmm: sparse cols " + std::to_string(s.cols) + " vs dense rows " +
                         std::to_string(d.shape()[0]));
    const std::size_t n = d.shape()[1];
    std::vector<double> out(s.rows * n, 0.0);
    const auto& x = d.data();
    // entries sorted by (row, col): accumulation per output entry is in
    // ascending column index, bit-identical to matmul on the densified matrix
    for (const auto& e : s.entries) {
        double* orow = out.data() + e.row * n;
        const double* xrow = x.data() + e.col * n;
        for (std::size_t j = 0; j < n; ++j) orow[j] += e.value * xrow[j];
    }
    SparseMatrix st = s.transposed();
    return emit("spmm", {s.rows, n}, std::move(out), {&d},
                [st](const Tensor& g, const Tensor&) {
                    return std::vector<Tensor>{spmm(st, g)};
                });
}

Tensor reshape(const Tensor& a, std::vector<std::size_t> shape) {
    std::size_t n = 1;
    for (std::size_t v : shape) n *= v;
    if (n != a.numel()) throw ShapeError("reshape: element count mismatch");
    std::vector<std::size_t> old_shape = a.shape();
    return emit("reshape", std::move(shape), a.data(), {&a},
                [old_shape](const Tensor& g, const Tensor&) {
                    return std::vector<Tensor>{reshape(g, old_shape)};
                });
}

Tensor gather_rows(const Tensor& a, const std::vector<std::size_t>& idx) {
    require_2d(a, "gather_rows");
    const std::size_t n = a.shape()[0], c = a.shape()[1];
    std::vector<double> out(idx.size() * c);
    const auto& x = a.data();
    for (std::size_t r = 0; r < idx.size(); ++r) {
        if (idx[r] >= n) throw ShapeError("gather_rows: index out of range");
        std::copy(x.begin() + static_cast<std::ptrdiff_t>(idx[r] * c),
                  x.begin() + static_cast<std::ptrdiff_t>((idx[r] + 1) * c),
                  out.begin() + static_cast<std::ptrdiff_t>(r * c));
    }
    return emit("gather_rows", {idx.size(), c}, std::move(out), {&a},
                [idx, n](const Tensor& g, const Tensor&) {
                    return std::vector<Tensor>{scatter_rows(g, idx, n)};
                });
}

Tensor scatter_rows(const Tensor& a, const std::vector<std::size_t>& idx, std::size_t n_rows) {
    require_2d(a, "scatter_rows");
    if (a.shape()[0] != idx.size()) throw ShapeError("scatter_rows: row/index count mismatch");
    const std::size_t c = a.shape()[1];
    std::vector<double> out(n_rows * c, 0.0);
    const auto& x = a.data();
    for (std::size_t r = 0; r < idx.size(); ++r) {
        if (idx[r] >= n_rows) throw ShapeError("scatter_rows: index out of range");
        for (std::size_t j = 0; j < c; ++j) out[idx[r] * c + j] += x[r * c + j];
    }
    return emit("scatter_rows", {n_rows, c}, std::move(out), {&a},
                [idx](const Tensor& g, const Tensor&) {
                    return std::vector<Tensor>{gather_rows(g, idx)};
                });
}

Tensor slice_flat(const Tensor& a, std::size_t offset, std::size_t len) {
    if (a.ndim() != 1) throw ShapeError("slice_flat: expected a 1-d tensor");
    if (offset + len > a.numel()) throw ShapeError("slice_flat: range out of bounds");
    std::vector<double> out(a.data().begin() + static_cast<std::ptrdiff_t>(offset),
                            a.data().begin() + static_cast<std::ptrdiff_t>(offset + len));
    const std::size_t total = a.numel();
    return emit("slice_flat", {len}, std::move(out), {&a},
                [offset, total](const Tensor& g, const Tensor&) {
                    return std::vector<Tensor>{pad_flat(g, offset, total)};
                });
}

Tensor pad_flat(const Tensor& a, std::size_t offset, std::size_t total) {
    if (a.ndim() != 1) throw ShapeError("pad_flat: expected a 1-d tensor");
    if (offset + a.numel() > total) throw ShapeError("pad_flat: range out of bounds");
    std::vector<double> out(total, 0.0);
    std::copy(a.data().begin(), a.data().end(), out.begin() + static_cast<std::ptrdiff_t>(offset));
    const std::size_t len = a.numel();
    return emit("pad_flat", {total}, std::move(out), {&a},
                [offset, len](const Tensor& g, const Tensor&) {
                    return std::vector<Tensor>{slice_flat(g, offset, len)};
                });
}

Tensor concat_cols(const Tensor& a, const Tensor& b) {
    require_2d(a, "concat_cols");
    require_2d(b, "concat_cols");
    if (a.shape()[0] != b.shape()[0]) throw ShapeError("concat_cols: row counts differ");
    const std::size_t n = a.shape()[0], p = a.shape()[1], q = b.shape()[1];
    std::vector<double> out(n * (p + q));
    const auto& x = a.data();
    const auto& y = b.data();
    for (std::size_t i = 0; i < n; ++i) {
        std::copy(x.begin() + static_cast<std::ptrdiff_t>(i * p),
                  x.begin() + static_cast<std::ptrdiff_t>((i + 1) * p),
                  out.begin() + static_cast<std::ptrdiff_t>(i * (p + q)));
        std::copy(y.begin() + static_cast<std::ptrdiff_t>(i * q),
                  y.begin() + static_cast<std::ptrdiff_t>((i + 1) * q),
                  out.begin() + static_cast<std::ptrdiff_t>(i * (p + q) + p));
    }
    return emit("concat_cols", {n, p + q}, std::move(out), {&a, &b},
                [p, q](const Tensor& g, const Tensor&) {
                    return std::vector<Tensor>{slice_cols(g, 0, p), slice_cols(g, p, q)};
                });
}

Tensor slice_cols(const Tensor& a, std::size_t offset, std::size_t len) {
    require_2d(a, "slice_cols");
    const std::size_t n = a.shape()[0], c = a.shape()[1];
    if (offset + len > c) throw ShapeError("slice_cols: range out of bounds");
    std::vector<double> out(n * len);
    const auto& x = a.data();
    for (std::size_t i = 0; i < n; ++i)
        std::copy(x.begin() + static_cast<std::ptrdiff_t>(i * c + offset),
                  x.begin() + static_cast<std::ptrdiff_t>(i * c + offset + len),
                  out.begin() + static_cast<std::ptrdiff_t>(i * len));
    return emit("slice_cols", {n, len}, std::move(out), {&a},
                [offset, c, n](const Tensor& g, const Tensor&) {
                    const std::size_t len_g = g.shape()[1];
                    Tensor padded = g;
                    if (offset > 0) padded = concat_cols(Tensor::zeros({n, offset}), padded);
                    if (offset + len_g < c)
                        padded = concat_cols(padded, Tensor::zeros({n, c - offset - len_g}));
                    return std::vector<Tensor>{padded};
                });
}

Tensor colwise_sum(const Tensor& a) {
    require_2d(a, "colwise_sum");
    const std::size_t n = a.shape()[0], c = a.shape()[1];
    std::vector<double> out(c, 0.0);
    const auto& x = a.data();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < c; ++j) out[j] += x[i * c + j];
    return emit("colwise_sum", {1, c}, std::move(out), {&a},
                [n](const Tensor& g, const Tensor&) {
                    return std::vector<Tensor>{bcast_rows(g, n)};
                });
}

Tensor bcast_rows(const Tensor& a, std::size_t n) {
    require_2d(a, "bcast_rows");
    if (a.shape()[0] != 1) throw ShapeError("bcast_rows: expected a 1 x c tensor");
    const std::size_t c = a.shape()[1];
    std::vector<double> out(n * c);
    const auto& x = a.data();
    for (std::size_t i = 0; i < n; ++i)
        std::copy(x.begin(), x.end(), out.begin() + static_cast<std::ptrdiff_t>(i * c));
    return emit("bcast_rows", {n, c}, std::move(out), {&a},
                [](const Tensor& g, const Tensor&) {
                    return std::vector<Tensor>{colwise_sum(g)};
                });
}

Tensor rowwise_sum(const Tensor& a) {
    require_2d(a, "rowwise_sum");
    const std::size_t n = a.shape()[0], c = a.shape()[1];
    std::vector<double> out(n, 0.0);
    const auto& x = a.data();
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < c; ++j) acc += x[i * c + j];
        out[i] = acc;
    }
    return emit("rowwise_sum", {n, 1}, std::move(out), {&a},
                [c](const Tensor& g, const Tensor&) {
                    return std::vector<Tensor>{bcast_cols(g, c)};
                });
}

Tensor bcast_cols(const Tensor& a, std::size_t c) {
    require_2d(a, "bcast_cols");
    if (a.shape()[1] != 1) throw ShapeError("bcast_cols: expected an n x 1 tensor");
    const std::size_t n = a.shape()[0];
    std::vector<double> out(n * c);
    const auto& x = a.data();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < c; ++j) out[i * c + j] = x[i];
    return emit("bcast_cols", {n, c}, std::move(out), {&a},
                [](const Tensor& g, const Tensor&) {
                    return std::vector<Tensor>{rowwise_sum(g)};
                });
}

Tensor sum_all(const Tensor& a) {
    double acc = 0.0;
    for (double v : a.data()) acc += v;
    std::vector<std::size_t> shape = a.shape();
    return emit("sum_all", {1}, {acc}, {&a},
                [shape](const Tensor& g, const Tensor&) {
                    return std::vector<Tensor>{bcast_scalar(g, shape)};
                });
}

Tensor bcast_scalar(const Tensor& a, std::vector<std::size_t> shape) {
    if (a.numel() != 1) throw ShapeError("bcast_scalar: expected a one-element tensor");
    std::size_t n = 1;
    for (std::size_t v : shape) n *= v;
    std::vector<double> out(n, a.data()[0]);
    return emit("bcast_scalar", std::move(shape), std::move(out), {&a},
                [](const Tensor& g, const Tensor&) {
                    return std::vector<Tensor>{sum_all(g)};
                });
}

Tensor log_softmax_rows(const Tensor& a) {
    require_2d(a, "log_softmax_rows");
    const std::size_t n = a.shape()[0], c = a.shape()[1];
    if (n == 0 || c == 0) throw ValidationError("log_softmax_rows: empty input");
    std::vector<double> out(n * c);
    const auto& x = a.data();
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = x.data() + i * c;
        double m = row[0];
        for (std::size_t j = 1; j < c; ++j) m = std::max(m, row[j]);
        double s = 0.0;
        for (std::size_t j = 0; j < c; ++j) s += std::exp(row[j] - m);
        const double lse = m + std::log(s);
        for (std::size_t j = 0; j < c; ++j) out[i * c + j] = row[j] - lse;
    }
    return emit("log_softmax_rows", {n, c}, std::move(out), {&a},
                [c](const Tensor& g, const Tensor& y) {
                    Tensor p = exp(y);
                    Tensor row_tot = bcast_cols(rowwise_sum(g), c);
                    return std::vector<Tensor>{sub(g, hadamard(p, row_tot))};
                });
}

Tensor softmax_rows(const Tensor& a) { return exp(log_softmax_rows(a)); }

Tensor l2_norm(const Tensor& a) {
    double acc = 0.0;
    for (double v : a.data()) acc += v * v;
    const double norm = std::sqrt(acc);
    std::vector<std::size_t> shape = a.shape();
    const bool at_origin = (norm == 0.0);
    return emit("l2_norm", {1}, {norm}, {&a},
                [a, shape, at_origin](const Tensor& g, const Tensor& y) {
                    if (at_origin)  // subgradient choice: zero vector
                        return std::vector<Tensor>{Tensor::zeros(shape)};
                    return std::vector<Tensor>{
                        hadamard(bcast_scalar(divide(g, y), shape), a)};
                });
}

Tensor softmax_cross_entropy_rows(const Tensor& logits, const Tensor& targets) {
    require_2d(logits, "softmax_cross_entropy_rows");
    const std::size_t n = logits.shape()[0], c = logits.shape()[1];
    if (n == 0 || c == 0) throw ValidationError("softmax_cross_entropy_rows: empty input");
    require_same_shape(logits, targets, "softmax_cross_entropy_rows");
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t ones = 0;
        for (std::size_t j = 0; j < c; ++j) {
            const double v = targets(i, j);
            if (v == 1.0)
                ++ones;
            else if (v != 0.0)
                throw ValidationError("softmax_cross_entropy_rows: target row is not one-hot");
        }
        if (ones != 1)
            throw ValidationError("softmax_cross_entropy_rows: target row is not one-hot");
    }
    return neg(sum_all(hadamard(targets.detach(), log_softmax_rows(logits))));
}

Tensor sigmoid_bce(const Tensor& logits, const Tensor& targets) {
    require_same_shape(logits, targets, "sigmoid_bce");
    if (logits.numel() == 0) throw ValidationError("sigmoid_bce: empty input");
    for (double v : targets.data())
        if (v != 0.0 && v != 1.0)
            throw ValidationError("sigmoid_bce: targets must be 0 or 1");
    Tensor ones = Tensor::full(targets.shape(), 1.0);
    Tensor t = targets.detach();
    // per element: softplus(-z) + (1 - t) * z, the stabilized log-sum-exp form
    return sum_all(add(softplus(neg(logits)), hadamard(sub(ones, t), logits)));
}

}  // namespace mignn
