#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ablist::diff {

class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Dense row-major tensor of doubles. All arithmetic in the library works on
/// rank-2 tensors; other ranks exist only so checkpoints can carry them.
class Tensor {
public:
    Tensor() = default;
    Tensor(std::size_t rows, std::size_t cols, double fill = 0.0);
    Tensor(std::size_t rows, std::size_t cols, std::vector<double> data);
    Tensor(std::vector<std::size_t> shape, std::vector<double> data);

    static Tensor scalar(double v) { return Tensor(1, 1, v); }
    static Tensor ones(std::size_t rows, std::size_t cols) { return Tensor(rows, cols, 1.0); }
    static Tensor identity(std::size_t n);
    static Tensor row(std::vector<double> values);
    static Tensor column(std::vector<double> values);

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t rows() const;
    std::size_t cols() const;
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * shape_[1] + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * shape_[1] + c]; }
    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    std::span<double> data() { return data_; }
    std::span<const double> data() const { return data_; }
    std::span<const double> row_span(std::size_t r) const;
    std::vector<double>& storage() { return data_; }

    double item() const;
    bool all_finite() const;
    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
    std::string shape_string() const;

    friend bool operator==(const Tensor& a, const Tensor& b) = default;

private:
    std::vector<std::size_t> shape_;
    std::vector<double> data_;
};

/// Largest elementwise absolute difference; throws on shape mismatch.
double max_abs_diff(const Tensor& a, const Tensor& b);

} // namespace ablist::diff
