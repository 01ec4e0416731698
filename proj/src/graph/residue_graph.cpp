#include <ablist/graph/residue_graph.hpp>

#include <cmath>
#include <random>
#include <stdexcept>

namespace ablist::graph {

void ResidueStructure::validate() const {
    if (residues.empty()) throw std::invalid_argument("structure: empty structure");
    if (sequence.size() != residues.size()) {
        throw std::invalid_argument("structure: sequence length " + std::to_string(sequence.size()) +
                                    " != residue count " + std::to_string(residues.size()));
    }
    for (const auto& atoms : residues) {
        if (atoms.empty()) throw std::invalid_argument("structure: residue without atoms");
        for (const auto& p : atoms)
            for (double c : p)
                if (!std::isfinite(c)) throw std::invalid_argument("structure: non-finite coordinate");
    }
}

ResidueGraph build_graph(const ResidueStructure& s, double threshold) {
    if (!(threshold > 0.0)) throw std::invalid_argument("build_graph: threshold must be > 0");
    s.validate();
    const std::size_t n = s.size();
    if (n > kMaxResidues) {
        throw std::invalid_argument("build_graph: " + std::to_string(n) + " residues exceeds dense cap " +
                                    std::to_string(kMaxResidues));
    }
    const double t2 = threshold * threshold;
    ResidueGraph g;
    g.node_count = n;
    for (std::size_t u = 0; u < n; ++u) {
        for (std::size_t v = u + 1; v < n; ++v) {
            bool contact = false;
            for (const auto& a : s.residues[u]) {
                for (const auto& b : s.residues[v]) {
                    const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
                    if (dx * dx + dy * dy + dz * dz < t2) {
                        contact = true;
                        break;
                    }
                }
                if (contact) break;
            }
            if (contact) g.edges.push_back({static_cast<std::uint32_t>(u), static_cast<std::uint32_t>(v)});
        }
    }
    return g;
}

diff::Tensor normalize_adjacency(const std::vector<Edge>& edges, std::size_t node_count) {
    std::vector<double> degree(node_count, 1.0);   // self-loop
    for (const auto& e : edges) {
        if (e.u >= node_count || e.v >= node_count || e.u == e.v) {
            throw std::invalid_argument("normalize_adjacency: invalid edge");
        }
        degree[e.u] += 1.0;
        degree[e.v] += 1.0;
    }
    diff::Tensor a(node_count, node_count);
    for (std::size_t i = 0; i < node_count; ++i) a(i, i) = 1.0 / degree[i];
    for (const auto& e : edges) {
        const double w = 1.0 / std::sqrt(degree[e.u] * degree[e.v]);
        a(e.u, e.v) = w;
        a(e.v, e.u) = w;
    }
    return a;
}

ResidueGraph make_graph(const ResidueStructure& s, diff::Tensor features, double threshold) {
    ResidueGraph g = build_graph(s, threshold);
    if (features.rows() != g.node_count) {
        throw std::invalid_argument("make_graph: feature rows do not match residue count");
    }
    g.features = std::move(features);
    g.adjacency = normalize_adjacency(g.edges, g.node_count);
    return g;
}

void AugmentConfig::validate() const {
    auto ok = [](double p) { return p >= 0.0 && p < 1.0; };
    if (!ok(edge_drop_prob) || !ok(feature_mask_prob)) {
        throw std::invalid_argument("augment: probabilities must lie in [0, 1)");
    }
}

ResidueGraph augment(const ResidueGraph& g, const AugmentConfig& cfg) {
    cfg.validate();
    std::mt19937_64 rng(cfg.seed);
    std::bernoulli_distribution drop_edge(cfg.edge_drop_prob);
    std::bernoulli_distribution mask_row(cfg.feature_mask_prob);

    ResidueGraph out;
    out.node_count = g.node_count;
    out.edges.reserve(g.edges.size());
    for (const auto& e : g.edges)
        if (!drop_edge(rng)) out.edges.push_back(e);
    out.features = g.features;
    if (!out.features.empty()) {
        const std::size_t d = out.features.cols();
        for (std::size_t i = 0; i < out.node_count; ++i) {
            if (mask_row(rng)) {
                for (std::size_t j = 0; j < d; ++j) out.features(i, j) = 0.0;
            }
        }
    }
    out.adjacency = normalize_adjacency(out.edges, out.node_count);
    return out;
}

} // namespace ablist::graph
