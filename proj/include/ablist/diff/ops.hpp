#pragma once

#include <ablist/diff/var.hpp>

#include <random>
#include <span>

namespace ablist::diff {

// Matrix products and layout.
Var matmul(const Var& a, const Var& b);
Var transpose(const Var& a);
Var concat_cols(std::span<const Var> parts);
Var concat_rows(std::span<const Var> parts);
Var slice_cols(const Var& a, std::size_t begin, std::size_t width);
Var pad_cols(const Var& a, std::size_t begin, std::size_t total_cols);
Var gather_rows(const Var& a, std::span<const std::size_t> index);
/// Row i of the input is added into row index[i] of an m-row zero matrix.
Var scatter_rows(const Var& a, std::span<const std::size_t> index, std::size_t m);

// Elementwise.
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, double s);
Var add_scalar(const Var& a, double s);
Var relu(const Var& a);
Var pow_scalar(const Var& a, double p);

// Reductions and broadcasts.
Var sum(const Var& a);                                  // -> 1x1
Var sum_over_rows(const Var& a);                        // m x n -> 1 x n
Var mean_rows(const Var& a);                            // m x n -> 1 x n
Var row_sums(const Var& a);                             // m x n -> m x 1
Var broadcast_rows(const Var& row, std::size_t m);      // 1 x n -> m x n
Var broadcast_cols(const Var& col, std::size_t n);      // m x 1 -> m x n
Var add_row(const Var& a, const Var& row);              // bias add

// Row-wise normalizers. A mask, when given, is a 0/1 tensor of the input's
// shape; zero entries are excluded from the row.
Var softmax(const Var& a);
Var softmax(const Var& a, const Tensor& mask);
Var log_softmax(const Var& a);
Var logsumexp_rows(const Var& a);
Var logsumexp_rows(const Var& a, const Tensor& mask);
Var l2_normalize_rows(const Var& a, double eps = 1e-12);

/// Inverted dropout: entries kept with probability `keep` and scaled by 1/keep.
Var dropout(const Var& a, double keep, std::mt19937_64& rng);
/// Applies a precomputed 0/1 keep mask with inverted scaling.
Var dropout_mask(const Var& a, const Tensor& mask, double keep);

} // namespace ablist::diff
