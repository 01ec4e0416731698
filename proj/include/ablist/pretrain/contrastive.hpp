#pragma once

#include <ablist/cluster/kmeans.hpp>
#include <ablist/diff/var.hpp>

#include <cstdint>
#include <span>
#include <vector>

namespace ablist::pretrain {

// Both losses L2-normalize the rows of the weak (E1) and strong (E2) view
// embeddings first, so only directions matter. The denominator for anchor i
// sums exp(e1_i . e2_j / tau) + exp(e1_i . e1_j / tau) over j != i and does
// not contain the positive pair.

/// -(1/B) sum_i log(exp(e1_i . e2_i / tau) / Omega_i). Needs B >= 2.
diff::Var instance_loss(const diff::Var& e1, const diff::Var& e2, double tau);

/// Positives of one anchor: rows of the weak view and rows of the strong view.
/// Duplicates are allowed and weigh in proportionally.
struct PositiveSet {
    std::vector<std::size_t> weak;
    std::vector<std::size_t> strong;
    bool empty() const { return weak.empty() && strong.empty(); }
    std::size_t size() const { return weak.size() + strong.size(); }
};

/// Mean over anchors with a non-empty set of the mean log-ratio across
/// their positives. `skipped`, when given, receives the number of anchors
/// left out. Throws when every set is empty.
diff::Var cluster_loss(const diff::Var& e1, const diff::Var& e2, std::span<const PositiveSet> positives, double tau,
                       std::size_t* skipped = nullptr);

/// k-means prototypes over the rows of the weak view.
cluster::KMeansResult kmeans_prototypes(const diff::Tensor& e1, std::size_t n_proto, std::uint64_t seed);

/// (S_cluster ∩ S_pred) ∪ S_KNN for anchor i over weak-view rows: same
/// prototype and same predicted class, or among the k highest cosine
/// similarities (lowest index on ties). Rows with eligible[j] == 0 are never
/// members; an empty `eligible` admits everyone. Sorted, i excluded.
std::vector<std::size_t> build_positive_set(std::size_t i, const diff::Tensor& e1, std::span<const std::size_t> predicted,
                                            std::span<const std::size_t> prototypes, std::size_t k,
                                            std::span<const std::uint8_t> eligible = {});

/// Row-wise L2 normalization of a plain tensor.
diff::Tensor normalized_rows(const diff::Tensor& e);

} // namespace ablist::pretrain
