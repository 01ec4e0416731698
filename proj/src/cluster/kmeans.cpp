#include <ablist/cluster/kmeans.hpp>

#include <limits>
#include <stdexcept>

namespace ablist::cluster {

namespace {

double sq_dist(const diff::Tensor& a, std::size_t i, const diff::Tensor& b, std::size_t j) {
    double s = 0.0;
    for (std::size_t c = 0; c < a.cols(); ++c) {
        const double d = a(i, c) - b(j, c);
        s += d * d;
    }
    return s;
}

} // namespace

KMeansResult kmeans(const diff::Tensor& x, std::size_t k, std::uint64_t seed, std::size_t max_iter) {
    const std::size_t n = x.rows(), d = x.cols();
    if (k == 0) throw std::invalid_argument("kmeans: k must be >= 1");
    if (n < k) throw std::invalid_argument("kmeans: fewer rows than clusters");

    KMeansResult r;
    r.centroids = diff::Tensor(k, d);
    auto set_centroid = [&](std::size_t c, std::size_t row) {
        for (std::size_t j = 0; j < d; ++j) r.centroids(c, j) = x(row, j);
    };
    set_centroid(0, static_cast<std::size_t>(seed % n));
    std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
    for (std::size_t c = 1; c < k; ++c) {
        std::size_t far = 0;
        double best = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
            nearest[i] = std::min(nearest[i], sq_dist(x, i, r.centroids, c - 1));
            if (nearest[i] > best) {
                best = nearest[i];
                far = i;
            }
        }
        set_centroid(c, far);
    }

    r.assignment.assign(n, k);   // sentinel: nothing assigned yet
    for (r.iterations = 0; r.iterations < max_iter; ++r.iterations) {
        bool changed = false;
        double objective = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t best_c = 0;
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < k; ++c) {
                const double dist = sq_dist(x, i, r.centroids, c);
                if (dist < best) {
                    best = dist;
                    best_c = c;
                }
            }
            objective += best;
            if (r.assignment[i] != best_c) changed = true;
            r.assignment[i] = best_c;
        }
        r.objective.push_back(objective);
        if (!changed) break;

        diff::Tensor sums(k, d);
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            ++counts[r.assignment[i]];
            for (std::size_t j = 0; j < d; ++j) sums(r.assignment[i], j) += x(i, j);
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] == 0) continue;
            for (std::size_t j = 0; j < d; ++j) r.centroids(c, j) = sums(c, j) / static_cast<double>(counts[c]);
        }
    }
    return r;
}

} // namespace ablist::cluster
