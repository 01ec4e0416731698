#include <ablist/graph/features.hpp>

#include <cmath>
#include <stdexcept>

namespace ablist::graph {

std::size_t amino_index(char aa) {
    const auto pos = kAminoAcids.find(aa);
    if (pos == std::string_view::npos) {
        throw std::invalid_argument(std::string("unknown amino acid '") + aa + "'");
    }
    return pos;
}

diff::Tensor SyntheticFeatures::features(std::string_view sequence) const {
    const std::size_t n_aa = kAminoAcids.size();
    diff::Tensor h(sequence.size(), width());
    for (std::size_t i = 0; i < sequence.size(); ++i) {
        h(i, amino_index(sequence[i])) = 1.0;
        for (std::size_t k = 0; k < kPositional / 2; ++k) {
            const double angle = static_cast<double>(i) / std::pow(100.0, static_cast<double>(k) / 6.0);
            h(i, n_aa + 2 * k) = std::sin(angle);
            h(i, n_aa + 2 * k + 1) = std::cos(angle);
        }
    }
    return h;
}

PairGraphs build_pair_graphs(const AbAgPair& pair, const FeatureProvider& features, double threshold) {
    return {make_graph(pair.ab, features.features(pair.ab.sequence), threshold),
            make_graph(pair.ag, features.features(pair.ag.sequence), threshold)};
}

} // namespace ablist::graph
