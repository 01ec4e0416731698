#include <ablist/pretrain/contrastive.hpp>

#include <ablist/diff/ops.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace ablist::pretrain {

using diff::Tensor;
using diff::Var;

namespace {

struct Logits {
    Var all;          // B x 2B: [e1 e2^T | e1 e1^T] / tau
    Var log_omega;    // B x 1
};

Logits contrast_logits(const Var& e1, const Var& e2, double tau) {
    if (!(tau > 0.0)) throw std::invalid_argument("contrastive: tau must be > 0");
    if (!e1.value().same_shape(e2.value())) throw diff::ShapeError("contrastive: view shapes differ");
    const std::size_t b = e1.rows();
    if (b < 2) throw std::invalid_argument("contrastive: batch needs at least 2 samples");
    const Var n1 = diff::l2_normalize_rows(e1);
    const Var n2 = diff::l2_normalize_rows(e2);
    const Var parts[] = {diff::matmul(n1, diff::transpose(n2)), diff::matmul(n1, diff::transpose(n1))};
    Logits l;
    l.all = diff::scale(diff::concat_cols(parts), 1.0 / tau);
    Tensor mask(b, 2 * b, 1.0);
    for (std::size_t i = 0; i < b; ++i) {
        mask(i, i) = 0.0;
        mask(i, b + i) = 0.0;
    }
    l.log_omega = diff::logsumexp_rows(l.all, mask);
    return l;
}

} // namespace

Var instance_loss(const Var& e1, const Var& e2, double tau) {
    const auto l = contrast_logits(e1, e2, tau);
    const std::size_t b = e1.rows();
    Tensor pick(b, 2 * b);
    for (std::size_t i = 0; i < b; ++i) pick(i, i) = 1.0;
    const Var positive = diff::row_sums(diff::mul(l.all, Var::constant(pick)));
    return diff::scale(diff::sum(diff::sub(positive, l.log_omega)), -1.0 / static_cast<double>(b));
}

Var cluster_loss(const Var& e1, const Var& e2, std::span<const PositiveSet> positives, double tau, std::size_t* skipped) {
    const std::size_t b = e1.rows();
    if (positives.size() != b) throw std::invalid_argument("cluster_loss: need one positive set per anchor");
    Tensor weight(b, 2 * b);
    Tensor active(b, 1);
    std::size_t n_active = 0;
    for (std::size_t i = 0; i < b; ++i) {
        const auto& p = positives[i];
        if (p.empty()) continue;
        const double w = 1.0 / static_cast<double>(p.size());
        for (auto j : p.strong) {
            if (j >= b) throw std::out_of_range("cluster_loss: positive index out of range");
            weight(i, j) += w;
        }
        for (auto j : p.weak) {
            if (j >= b) throw std::out_of_range("cluster_loss: positive index out of range");
            if (j == i) throw std::invalid_argument("cluster_loss: anchor listed as its own weak positive");
            weight(i, b + j) += w;
        }
        active(i, 0) = 1.0;
        ++n_active;
    }
    if (skipped) *skipped = b - n_active;
    if (n_active == 0) throw std::invalid_argument("cluster_loss: every positive set is empty");

    const auto l = contrast_logits(e1, e2, tau);
    const Var mean_positive = diff::row_sums(diff::mul(l.all, Var::constant(weight)));
    const Var per_anchor = diff::mul(diff::sub(mean_positive, l.log_omega), Var::constant(active));
    return diff::scale(diff::sum(per_anchor), -1.0 / static_cast<double>(n_active));
}

Tensor normalized_rows(const Tensor& e) {
    Tensor out = e;
    for (std::size_t i = 0; i < e.rows(); ++i) {
        double n2 = 0.0;
        for (std::size_t j = 0; j < e.cols(); ++j) n2 += e(i, j) * e(i, j);
        const double inv = 1.0 / std::sqrt(n2 + 1e-12);
        for (std::size_t j = 0; j < e.cols(); ++j) out(i, j) *= inv;
    }
    return out;
}

cluster::KMeansResult kmeans_prototypes(const Tensor& e1, std::size_t n_proto, std::uint64_t seed) {
    return cluster::kmeans(e1, n_proto, seed);
}

std::vector<std::size_t> build_positive_set(std::size_t i, const Tensor& e1, std::span<const std::size_t> predicted,
                                            std::span<const std::size_t> prototypes, std::size_t k,
                                            std::span<const std::uint8_t> eligible) {
    const std::size_t b = e1.rows();
    if (b < 2) throw std::invalid_argument("build_positive_set: batch needs at least 2 samples");
    if (i >= b || predicted.size() != b || prototypes.size() != b || (!eligible.empty() && eligible.size() != b)) {
        throw std::invalid_argument("build_positive_set: inconsistent batch inputs");
    }
    auto ok = [&](std::size_t j) { return j != i && (eligible.empty() || eligible[j]); };

    std::vector<std::uint8_t> member(b, 0);
    for (std::size_t j = 0; j < b; ++j) {
        if (ok(j) && prototypes[j] == prototypes[i] && predicted[j] == predicted[i]) member[j] = 1;
    }

    const Tensor n = normalized_rows(e1);
    std::vector<std::pair<double, std::size_t>> sims;
    for (std::size_t j = 0; j < b; ++j) {
        if (!ok(j)) continue;
        double s = 0.0;
        for (std::size_t c = 0; c < n.cols(); ++c) s += n(i, c) * n(j, c);
        sims.push_back({-s, j});
    }
    std::sort(sims.begin(), sims.end());
    for (std::size_t r = 0; r < std::min(k, sims.size()); ++r) member[sims[r].second] = 1;

    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < b; ++j)
        if (member[j]) out.push_back(j);
    return out;
}

} // namespace ablist::pretrain
