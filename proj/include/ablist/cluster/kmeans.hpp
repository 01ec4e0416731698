#pragma once

#include <ablist/diff/tensor.hpp>

#include <cstdint>
#include <vector>

namespace ablist::cluster {

struct KMeansResult {
    std::vector<std::size_t> assignment;   // per row
    diff::Tensor centroids;                // k x d
    std::vector<double> objective;         // sum of squared distances after each assignment step
    std::size_t iterations = 0;
};

/// Lloyd's algorithm on the rows of `x`. Seeding is deterministic: the first
/// centroid is row `seed % n`, each further one the row farthest from its
/// nearest chosen centroid (lowest index on ties). Empty clusters keep their
/// previous centroid. Stops when assignments repeat or after `max_iter`.
KMeansResult kmeans(const diff::Tensor& x, std::size_t k, std::uint64_t seed, std::size_t max_iter = 100);

} // namespace ablist::cluster
