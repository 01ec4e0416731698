#include <ablist/diff/tensor.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

namespace ablist::diff {

namespace {

std::size_t element_count(const std::vector<std::size_t>& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>{});
}

} // namespace

Tensor::Tensor(std::size_t rows, std::size_t cols, double fill)
    : shape_{rows, cols}, data_(rows * cols, fill) {}

Tensor::Tensor(std::size_t rows, std::size_t cols, std::vector<double> data)
    : shape_{rows, cols}, data_(std::move(data)) {
    if (data_.size() != rows * cols) {
        throw ShapeError("tensor: data length " + std::to_string(data_.size()) +
                         " does not match shape " + shape_string());
    }
}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    if (data_.size() != element_count(shape_)) {
        throw ShapeError("tensor: data length " + std::to_string(data_.size()) +
                         " does not match shape " + shape_string());
    }
}

Tensor Tensor::identity(std::size_t n) {
    Tensor t(n, n);
    for (std::size_t i = 0; i < n; ++i) t(i, i) = 1.0;
    return t;
}

Tensor Tensor::row(std::vector<double> values) {
    const std::size_t n = values.size();
    return Tensor(1, n, std::move(values));
}

Tensor Tensor::column(std::vector<double> values) {
    const std::size_t n = values.size();
    return Tensor(n, 1, std::move(values));
}

std::size_t Tensor::rows() const {
    if (shape_.size() != 2) throw ShapeError("tensor: rows() needs rank 2, got " + shape_string());
    return shape_[0];
}

std::size_t Tensor::cols() const {
    if (shape_.size() != 2) throw ShapeError("tensor: cols() needs rank 2, got " + shape_string());
    return shape_[1];
}

std::span<const double> Tensor::row_span(std::size_t r) const {
    const std::size_t c = cols();
    return std::span<const double>(data_).subspan(r * c, c);
}

double Tensor::item() const {
    if (data_.size() != 1) throw ShapeError("tensor: item() on non-scalar " + shape_string());
    return data_[0];
}

bool Tensor::all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

std::string Tensor::shape_string() const {
    std::string s = "[";
    for (std::size_t i = 0; i < shape_.size(); ++i) {
        if (i) s += "x";
        s += std::to_string(shape_[i]);
    }
    return s + "]";
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) {
        throw ShapeError("max_abs_diff: " + a.shape_string() + " vs " + b.shape_string());
    }
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

} // namespace ablist::diff
