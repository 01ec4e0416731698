#pragma once

#include <ablist/diff/tensor.hpp>

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace ablist::pretrain {

inline constexpr std::size_t kClasses = 3;

struct Thresholds {
    double low = 0.0;
    double high = 0.0;
};

/// Empirical 1/3 and 2/3 quantiles (linear interpolation between order
/// statistics) of the labeled training labels.
Thresholds tertile_thresholds(std::span<const double> labels);

/// -1 for y <= low (strong binder), 0 for low < y <= high, 1 otherwise.
int discretize_affinity(double y, Thresholds t);

/// Column of a class in the N x 3 target matrix.
constexpr std::size_t class_column(int cls) { return static_cast<std::size_t>(cls + 1); }

/// Soft class targets for every sample. Labeled rows hold exact one-hots of
/// the discretized label; unlabeled rows start at the one-hot of class 0.
struct PseudoLabelState {
    diff::Tensor targets;                 // N x 3
    std::vector<std::uint8_t> labeled;    // per sample
    std::vector<std::size_t> truth;       // ground-truth column, meaningful where labeled
    double beta = 0.9;

    static PseudoLabelState init(std::span<const std::optional<double>> labels, Thresholds t, double beta);
    std::size_t size() const { return labeled.size(); }
    /// Row-wise argmax column, lowest index on ties.
    std::vector<std::size_t> hard_labels() const;
};

/// One EMA refinement of `targets` (rows x 3):
/// meta = one-hot(argmax(targets + delta)), lowest index on ties;
/// out = beta * targets + (1 - beta) * meta; labeled rows reset to truth.
diff::Tensor refine_and_ema(const diff::Tensor& targets, const diff::Tensor& delta, double beta,
                            std::span<const std::uint8_t> labeled, std::span<const std::size_t> truth);

/// Applies refine_and_ema to the listed rows of `state`.
void refine_rows(PseudoLabelState& state, std::span<const std::size_t> rows, const diff::Tensor& delta);

} // namespace ablist::pretrain
