#include <ablist/diff/ops.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

namespace ablist::diff {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw ShapeError(what);
}

void require_same(const Var& a, const Var& b, const char* op) {
    require(a.value().same_shape(b.value()), std::string(op) + ": shape mismatch " +
                                                 a.value().shape_string() + " vs " +
                                                 b.value().shape_string());
}

// C = A * B with the zero-skipping i-k-j loop; adjacency and ReLU outputs are
// mostly zeros.
Tensor matmul_raw(const Tensor& a, const Tensor& b) {
    const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
    Tensor c(m, n);
    const double* pa = a.data().data();
    const double* pb = b.data().data();
    double* pc = c.data().data();
    for (std::size_t i = 0; i < m; ++i) {
        double* crow = pc + i * n;
        for (std::size_t p = 0; p < k; ++p) {
            const double aip = pa[i * k + p];
            if (aip == 0.0) continue;
            const double* brow = pb + p * n;
            for (std::size_t j = 0; j < n; ++j) crow[j] += aip * brow[j];
        }
    }
    return c;
}

Tensor transpose_raw(const Tensor& a) {
    const std::size_t m = a.rows(), n = a.cols();
    Tensor t(n, m);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) t(j, i) = a(i, j);
    return t;
}

Tensor softmax_raw(const Tensor& a, const Tensor* mask) {
    const std::size_t m = a.rows(), n = a.cols();
    Tensor s(m, n);
    for (std::size_t i = 0; i < m; ++i) {
        double mx = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n; ++j)
            if (!mask || (*mask)(i, j) != 0.0) mx = std::max(mx, a(i, j));
        if (!std::isfinite(mx)) throw NumericError("softmax: row with no unmasked entries");
        double z = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (mask && (*mask)(i, j) == 0.0) continue;
            s(i, j) = std::exp(a(i, j) - mx);
            z += s(i, j);
        }
        for (std::size_t j = 0; j < n; ++j) s(i, j) /= z;
    }
    return s;
}

Tensor logsumexp_raw(const Tensor& a, const Tensor* mask) {
    const std::size_t m = a.rows(), n = a.cols();
    Tensor out(m, 1);
    for (std::size_t i = 0; i < m; ++i) {
        double mx = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n; ++j)
            if (!mask || (*mask)(i, j) != 0.0) mx = std::max(mx, a(i, j));
        if (!std::isfinite(mx)) throw NumericError("logsumexp: row with no unmasked entries");
        double z = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            if (!mask || (*mask)(i, j) != 0.0) z += std::exp(a(i, j) - mx);
        out(i, 0) = mx + std::log(z);
    }
    return out;
}

template <typename F>
Tensor map_raw(const Tensor& a, F f) {
    Tensor out = a;
    for (auto& v : out.data()) v = f(v);
    return out;
}

} // namespace

Var matmul(const Var& a, const Var& b) {
    require(a.cols() == b.rows(), "matmul: inner dimension mismatch " + a.value().shape_string() +
                                      " x " + b.value().shape_string());
    return make_result(matmul_raw(a.value(), b.value()), {a, b},
        [a, b](const Var& g) -> std::vector<Var> {
            Var ga, gb;
            if (a.requires_grad()) ga = matmul(g, transpose(b));
            if (b.requires_grad()) gb = matmul(transpose(a), g);
            return {ga, gb};
        },
        "matmul");
}

Var transpose(const Var& a) {
    return make_result(transpose_raw(a.value()), {a},
        [](const Var& g) -> std::vector<Var> { return {transpose(g)}; }, "transpose");
}

Var concat_cols(std::span<const Var> parts) {
    require(!parts.empty(), "concat_cols: no inputs");
    const std::size_t m = parts[0].rows();
    std::size_t total = 0;
    for (const auto& p : parts) {
        require(p.rows() == m, "concat_cols: row count mismatch");
        total += p.cols();
    }
    Tensor out(m, total);
    std::size_t offset = 0;
    std::vector<std::size_t> offsets;
    for (const auto& p : parts) {
        offsets.push_back(offset);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < p.cols(); ++j) out(i, offset + j) = p.value()(i, j);
        offset += p.cols();
    }
    std::vector<Var> inputs(parts.begin(), parts.end());
    return make_result(std::move(out), inputs,
        [inputs, offsets](const Var& g) {
            std::vector<Var> grads(inputs.size());
            for (std::size_t k = 0; k < inputs.size(); ++k)
                if (inputs[k].requires_grad())
                    grads[k] = slice_cols(g, offsets[k], inputs[k].cols());
            return grads;
        },
        "concat_cols");
}

Var concat_rows(std::span<const Var> parts) {
    require(!parts.empty(), "concat_rows: no inputs");
    const std::size_t n = parts[0].cols();
    std::size_t total = 0;
    for (const auto& p : parts) {
        require(p.cols() == n, "concat_rows: column count mismatch");
        total += p.rows();
    }
    std::vector<double> data;
    data.reserve(total * n);
    for (const auto& p : parts) data.insert(data.end(), p.value().data().begin(), p.value().data().end());
    std::vector<Var> inputs(parts.begin(), parts.end());
    return make_result(Tensor(total, n, std::move(data)), inputs,
        [inputs](const Var& g) {
            std::vector<Var> grads(inputs.size());
            std::size_t offset = 0;
            for (std::size_t k = 0; k < inputs.size(); ++k) {
                const std::size_t r = inputs[k].rows();
                if (inputs[k].requires_grad()) {
                    std::vector<std::size_t> idx(r);
                    for (std::size_t i = 0; i < r; ++i) idx[i] = offset + i;
                    grads[k] = gather_rows(g, idx);
                }
                offset += r;
            }
            return grads;
        },
        "concat_rows");
}

Var slice_cols(const Var& a, std::size_t begin, std::size_t width) {
    require(begin + width <= a.cols(), "slice_cols: range out of bounds");
    const std::size_t m = a.rows(), total = a.cols();
    Tensor out(m, width);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < width; ++j) out(i, j) = a.value()(i, begin + j);
    return make_result(std::move(out), {a},
        [begin, total](const Var& g) -> std::vector<Var> { return {pad_cols(g, begin, total)}; },
        "slice_cols");
}

Var pad_cols(const Var& a, std::size_t begin, std::size_t total_cols) {
    require(begin + a.cols() <= total_cols, "pad_cols: range out of bounds");
    const std::size_t m = a.rows(), width = a.cols();
    Tensor out(m, total_cols);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < width; ++j) out(i, begin + j) = a.value()(i, j);
    return make_result(std::move(out), {a},
        [begin, width](const Var& g) -> std::vector<Var> { return {slice_cols(g, begin, width)}; },
        "pad_cols");
}

Var gather_rows(const Var& a, std::span<const std::size_t> index) {
    const std::size_t m = a.rows(), n = a.cols();
    Tensor out(index.size(), n);
    for (std::size_t i = 0; i < index.size(); ++i) {
        require(index[i] < m, "gather_rows: index out of range");
        std::copy_n(a.value().data().begin() + index[i] * n, n, out.data().begin() + i * n);
    }
    std::vector<std::size_t> idx(index.begin(), index.end());
    return make_result(std::move(out), {a},
        [idx, m](const Var& g) -> std::vector<Var> { return {scatter_rows(g, idx, m)}; },
        "gather_rows");
}

Var scatter_rows(const Var& a, std::span<const std::size_t> index, std::size_t m) {
    require(index.size() == a.rows(), "scatter_rows: index length must equal row count");
    const std::size_t n = a.cols();
    Tensor out(m, n);
    for (std::size_t i = 0; i < index.size(); ++i) {
        require(index[i] < m, "scatter_rows: index out of range");
        for (std::size_t j = 0; j < n; ++j) out(index[i], j) += a.value()(i, j);
    }
    std::vector<std::size_t> idx(index.begin(), index.end());
    return make_result(std::move(out), {a},
        [idx](const Var& g) -> std::vector<Var> { return {gather_rows(g, idx)}; },
        "scatter_rows");
}

Var add(const Var& a, const Var& b) {
    require_same(a, b, "add");
    Tensor out = a.value();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += b.value()[i];
    return make_result(std::move(out), {a, b},
        [](const Var& g) -> std::vector<Var> { return {g, g}; }, "add");
}

Var sub(const Var& a, const Var& b) {
    require_same(a, b, "sub");
    Tensor out = a.value();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b.value()[i];
    return make_result(std::move(out), {a, b},
        [b](const Var& g) -> std::vector<Var> {
            return {g, b.requires_grad() ? scale(g, -1.0) : Var{}};
        },
        "sub");
}

Var mul(const Var& a, const Var& b) {
    require_same(a, b, "mul");
    Tensor out = a.value();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b.value()[i];
    return make_result(std::move(out), {a, b},
        [a, b](const Var& g) -> std::vector<Var> {
            Var ga, gb;
            if (a.requires_grad()) ga = mul(g, b);
            if (b.requires_grad()) gb = mul(g, a);
            return {ga, gb};
        },
        "mul");
}

Var scale(const Var& a, double s) {
    return make_result(map_raw(a.value(), [s](double v) { return v * s; }), {a},
        [s](const Var& g) -> std::vector<Var> { return {scale(g, s)}; }, "scale");
}

Var add_scalar(const Var& a, double s) {
    return make_result(map_raw(a.value(), [s](double v) { return v + s; }), {a},
        [](const Var& g) -> std::vector<Var> { return {g}; }, "add_scalar");
}

Var relu(const Var& a) {
    return make_result(map_raw(a.value(), [](double v) { return v > 0.0 ? v : 0.0; }), {a},
        [a](const Var& g) -> std::vector<Var> {
            auto mask = Var::constant(map_raw(a.value(), [](double v) { return v > 0.0 ? 1.0 : 0.0; }));
            return {mul(g, mask)};
        },
        "relu");
}

Var pow_scalar(const Var& a, double p) {
    return make_result(map_raw(a.value(), [p](double v) { return std::pow(v, p); }), {a},
        [a, p](const Var& g) -> std::vector<Var> {
            return {mul(g, scale(pow_scalar(a, p - 1.0), p))};
        },
        "pow_scalar");
}

Var sum(const Var& a) {
    double s = 0.0;
    for (double v : a.value().data()) s += v;
    const std::size_t m = a.rows(), n = a.cols();
    return make_result(Tensor::scalar(s), {a},
        [m, n](const Var& g) -> std::vector<Var> {
            return {broadcast_rows(broadcast_cols(g, n), m)};
        },
        "sum");
}

Var sum_over_rows(const Var& a) {
    const std::size_t m = a.rows(), n = a.cols();
    Tensor out(1, n);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) out(0, j) += a.value()(i, j);
    return make_result(std::move(out), {a},
        [m](const Var& g) -> std::vector<Var> { return {broadcast_rows(g, m)}; }, "sum_over_rows");
}

Var mean_rows(const Var& a) {
    require(a.rows() > 0, "mean_rows: empty input");
    return scale(sum_over_rows(a), 1.0 / static_cast<double>(a.rows()));
}

Var row_sums(const Var& a) {
    const std::size_t m = a.rows(), n = a.cols();
    Tensor out(m, 1);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) out(i, 0) += a.value()(i, j);
    return make_result(std::move(out), {a},
        [n](const Var& g) -> std::vector<Var> { return {broadcast_cols(g, n)}; }, "row_sums");
}

Var broadcast_rows(const Var& row, std::size_t m) {
    require(row.rows() == 1, "broadcast_rows: expected a 1 x n input");
    const std::size_t n = row.cols();
    Tensor out(m, n);
    for (std::size_t i = 0; i < m; ++i)
        std::copy_n(row.value().data().begin(), n, out.data().begin() + i * n);
    return make_result(std::move(out), {row},
        [](const Var& g) -> std::vector<Var> { return {sum_over_rows(g)}; }, "broadcast_rows");
}

Var broadcast_cols(const Var& col, std::size_t n) {
    require(col.cols() == 1, "broadcast_cols: expected an m x 1 input");
    const std::size_t m = col.rows();
    Tensor out(m, n);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) out(i, j) = col.value()(i, 0);
    return make_result(std::move(out), {col},
        [](const Var& g) -> std::vector<Var> { return {row_sums(g)}; }, "broadcast_cols");
}

Var add_row(const Var& a, const Var& row) {
    require(row.rows() == 1 && row.cols() == a.cols(), "add_row: bias shape mismatch");
    return add(a, broadcast_rows(row, a.rows()));
}

Var softmax(const Var& a) {
    return make_result(softmax_raw(a.value(), nullptr), {a},
        [a](const Var& g) -> std::vector<Var> {
            Var s = softmax(a);
            Var inner = broadcast_cols(row_sums(mul(g, s)), a.cols());
            return {mul(s, sub(g, inner))};
        },
        "softmax");
}

Var softmax(const Var& a, const Tensor& mask) {
    require(mask.same_shape(a.value()), "softmax: mask shape mismatch");
    auto shared = std::make_shared<const Tensor>(mask);
    return make_result(softmax_raw(a.value(), shared.get()), {a},
        [a, shared](const Var& g) -> std::vector<Var> {
            Var s = softmax(a, *shared);
            Var inner = broadcast_cols(row_sums(mul(g, s)), a.cols());
            return {mul(s, sub(g, inner))};
        },
        "masked_softmax");
}

Var log_softmax(const Var& a) {
    const Tensor lse = logsumexp_raw(a.value(), nullptr);
    Tensor out = a.value();
    for (std::size_t i = 0; i < out.rows(); ++i)
        for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) -= lse(i, 0);
    return make_result(std::move(out), {a},
        [a](const Var& g) -> std::vector<Var> {
            Var total = broadcast_cols(row_sums(g), a.cols());
            return {sub(g, mul(softmax(a), total))};
        },
        "log_softmax");
}

Var logsumexp_rows(const Var& a) {
    return make_result(logsumexp_raw(a.value(), nullptr), {a},
        [a](const Var& g) -> std::vector<Var> {
            return {mul(broadcast_cols(g, a.cols()), softmax(a))};
        },
        "logsumexp_rows");
}

Var logsumexp_rows(const Var& a, const Tensor& mask) {
    require(mask.same_shape(a.value()), "logsumexp_rows: mask shape mismatch");
    auto shared = std::make_shared<const Tensor>(mask);
    return make_result(logsumexp_raw(a.value(), shared.get()), {a},
        [a, shared](const Var& g) -> std::vector<Var> {
            return {mul(broadcast_cols(g, a.cols()), softmax(a, *shared))};
        },
        "masked_logsumexp_rows");
}

Var l2_normalize_rows(const Var& a, double eps) {
    Var inv_norm = pow_scalar(add_scalar(row_sums(mul(a, a)), eps), -0.5);
    return mul(a, broadcast_cols(inv_norm, a.cols()));
}

Var dropout(const Var& a, double keep, std::mt19937_64& rng) {
    if (!(keep > 0.0 && keep <= 1.0)) throw std::invalid_argument("dropout: keep must be in (0, 1]");
    if (keep == 1.0) return a;
    std::bernoulli_distribution coin(keep);
    Tensor mask(a.rows(), a.cols());
    for (auto& v : mask.data()) v = coin(rng) ? 1.0 : 0.0;
    return dropout_mask(a, mask, keep);
}

Var dropout_mask(const Var& a, const Tensor& mask, double keep) {
    require(mask.same_shape(a.value()), "dropout_mask: mask shape mismatch");
    Tensor scaled = mask;
    for (auto& v : scaled.data()) v /= keep;
    return mul(a, Var::constant(std::move(scaled)));
}

} // namespace ablist::diff
