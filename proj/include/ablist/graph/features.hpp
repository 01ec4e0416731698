#pragma once

#include <ablist/diff/tensor.hpp>
#include <ablist/graph/pair.hpp>

#include <string_view>

namespace ablist::graph {

inline constexpr std::string_view kAminoAcids = "ACDEFGHIKLMNPQRSTVWY";

/// Index of `aa` in kAminoAcids; throws std::invalid_argument otherwise.
std::size_t amino_index(char aa);

/// Per-residue node features for a sequence.
class FeatureProvider {
public:
    virtual ~FeatureProvider() = default;
    virtual std::size_t width() const = 0;
    virtual diff::Tensor features(std::string_view sequence) const = 0;
};

/// One-hot residue identity (20) followed by 12 sinusoids of the residue
/// index: sin and cos at six geometrically spaced frequencies.
class SyntheticFeatures final : public FeatureProvider {
public:
    static constexpr std::size_t kPositional = 12;
    std::size_t width() const override { return kAminoAcids.size() + kPositional; }
    diff::Tensor features(std::string_view sequence) const override;
};

PairGraphs build_pair_graphs(const AbAgPair& pair, const FeatureProvider& features,
                             double threshold = kContactThreshold);

} // namespace ablist::graph
