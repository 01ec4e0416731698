#include <ablist/pretrain/targets.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ablist::pretrain {

namespace {

double quantile(std::vector<double> sorted, double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::size_t row_argmax(const diff::Tensor& t, std::size_t r) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < t.cols(); ++c)
        if (t(r, c) > t(r, best)) best = c;
    return best;
}

} // namespace

Thresholds tertile_thresholds(std::span<const double> labels) {
    if (labels.empty()) throw std::invalid_argument("tertile_thresholds: no labeled samples");
    std::vector<double> sorted(labels.begin(), labels.end());
    for (double v : sorted)
        if (!std::isfinite(v)) throw std::invalid_argument("tertile_thresholds: non-finite label");
    std::sort(sorted.begin(), sorted.end());
    return {quantile(sorted, 1.0 / 3.0), quantile(sorted, 2.0 / 3.0)};
}

int discretize_affinity(double y, Thresholds t) {
    if (!std::isfinite(y)) throw std::invalid_argument("discretize_affinity: non-finite label");
    if (!(t.low <= t.high)) throw std::invalid_argument("discretize_affinity: thresholds out of order");
    if (y <= t.low) return -1;
    if (y <= t.high) return 0;
    return 1;
}

PseudoLabelState PseudoLabelState::init(std::span<const std::optional<double>> labels, Thresholds t, double beta) {
    if (!(beta >= 0.0 && beta <= 1.0)) throw std::invalid_argument("pseudo-labels: beta must be in [0, 1]");
    PseudoLabelState s;
    s.beta = beta;
    s.targets = diff::Tensor(labels.size(), kClasses);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const bool has = labels[i].has_value();
        const std::size_t col = class_column(has ? discretize_affinity(*labels[i], t) : 0);
        s.labeled.push_back(has ? 1 : 0);
        s.truth.push_back(col);
        s.targets(i, col) = 1.0;
    }
    return s;
}

std::vector<std::size_t> PseudoLabelState::hard_labels() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < size(); ++i) out.push_back(row_argmax(targets, i));
    return out;
}

diff::Tensor refine_and_ema(const diff::Tensor& targets, const diff::Tensor& delta, double beta,
                            std::span<const std::uint8_t> labeled, std::span<const std::size_t> truth) {
    if (!targets.same_shape(delta)) throw diff::ShapeError("refine_and_ema: targets and delta differ in shape");
    if (labeled.size() != targets.rows() || truth.size() != targets.rows()) {
        throw std::invalid_argument("refine_and_ema: mask length mismatch");
    }
    diff::Tensor sum = targets;
    for (std::size_t k = 0; k < sum.size(); ++k) sum[k] += delta[k];
    diff::Tensor out(targets.rows(), targets.cols());
    for (std::size_t r = 0; r < targets.rows(); ++r) {
        if (labeled[r]) {
            out(r, truth[r]) = 1.0;
            continue;
        }
        const std::size_t meta = row_argmax(sum, r);
        for (std::size_t c = 0; c < targets.cols(); ++c) {
            out(r, c) = beta * targets(r, c) + (1.0 - beta) * (c == meta ? 1.0 : 0.0);
        }
    }
    return out;
}

void refine_rows(PseudoLabelState& state, std::span<const std::size_t> rows, const diff::Tensor& delta) {
    diff::Tensor sub(rows.size(), kClasses);
    std::vector<std::uint8_t> labeled;
    std::vector<std::size_t> truth;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t c = 0; c < kClasses; ++c) sub(i, c) = state.targets(rows[i], c);
        labeled.push_back(state.labeled[rows[i]]);
        truth.push_back(state.truth[rows[i]]);
    }
    const auto next = refine_and_ema(sub, delta, state.beta, labeled, truth);
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t c = 0; c < kClasses; ++c) state.targets(rows[i], c) = next(i, c);
}

} // namespace ablist::pretrain
