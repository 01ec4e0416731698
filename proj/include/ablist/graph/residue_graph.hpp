#pragma once

#include <ablist/diff/tensor.hpp>

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace ablist::graph {

using Point3 = std::array<double, 3>;

/// Residue-level point cloud of one chain. Every listed atom is treated as a
/// heavy atom; hydrogens are never represented.
struct ResidueStructure {
    std::string sequence;
    std::vector<std::vector<Point3>> residues;   // atoms per residue, in Å

    std::size_t size() const { return residues.size(); }
    /// Throws std::invalid_argument unless L >= 1, |sequence| == L, every
    /// residue has at least one atom and all coordinates are finite.
    void validate() const;
};

struct Edge {
    std::uint32_t u = 0;
    std::uint32_t v = 0;   // u < v
    friend bool operator==(const Edge&, const Edge&) = default;
    friend auto operator<=>(const Edge&, const Edge&) = default;
};

struct ResidueGraph {
    std::size_t node_count = 0;
    std::vector<Edge> edges;       // undirected, sorted, no self-loops
    diff::Tensor features;         // node_count x d_in
    diff::Tensor adjacency;        // normalized, node_count x node_count
};

/// Dense adjacency cap; larger chains are rejected rather than allocated.
inline constexpr std::size_t kMaxResidues = 512;
inline constexpr double kContactThreshold = 4.5;

/// Contact edges: (u, v) present iff the closest atom pair of residues u and
/// v is strictly closer than `threshold`. Returns edges only (no features or
/// adjacency).
ResidueGraph build_graph(const ResidueStructure& s, double threshold = kContactThreshold);

/// D^-1/2 (A + I) D^-1/2 with D the degree matrix of A + I.
diff::Tensor normalize_adjacency(const std::vector<Edge>& edges, std::size_t node_count);

/// Contact graph with node features and normalized adjacency filled in.
ResidueGraph make_graph(const ResidueStructure& s, diff::Tensor features,
                        double threshold = kContactThreshold);

struct AugmentConfig {
    double edge_drop_prob = 0.0;
    double feature_mask_prob = 0.0;
    std::uint64_t seed = 0;

    static AugmentConfig weak(std::uint64_t seed) { return {0.1, 0.0, seed}; }
    static AugmentConfig strong(std::uint64_t seed) { return {0.3, 0.3, seed}; }
    void validate() const;
};

/// Drops each edge and zeroes each feature row independently, then
/// re-normalizes. Edges are drawn before feature rows from one stream seeded
/// by `cfg.seed`.
ResidueGraph augment(const ResidueGraph& g, const AugmentConfig& cfg);

} // namespace ablist::graph
