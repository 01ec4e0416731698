#pragma once

#include <ablist/diff/var.hpp>
#include <ablist/graph/pair.hpp>

#include <cstdint>
#include <span>
#include <vector>

namespace ablist::encoder {

struct EncoderConfig {
    std::size_t d_in = 32;
    std::size_t d_hidden = 128;
    std::size_t d_out = 64;
    std::size_t classes = 3;

    std::size_t embedding_width() const { return 2 * d_out; }
    void validate() const;
};

struct BranchWeights {
    diff::Var w1;   // d_in x d_hidden
    diff::Var w2;   // d_hidden x d_out
};

/// Both GCN branches plus the affinity-class head. Copies share storage;
/// a "virtual" set built from non-leaf Vars can stand in for the leaves.
struct EncoderWeights {
    BranchWeights ab;
    BranchWeights ag;
    diff::Var cls_w;   // 2*d_out x classes
    diff::Var cls_b;   // 1 x classes

    static constexpr std::size_t kCount = 6;
    std::vector<diff::Var> list() const { return {ab.w1, ab.w2, ag.w1, ag.w2, cls_w, cls_b}; }
    static EncoderWeights from_list(std::span<const diff::Var> v);
    static std::vector<const char*> names();
};

/// Glorot-uniform GCN and classifier weights, zero classifier bias.
EncoderWeights init_encoder(const EncoderConfig& cfg, std::uint64_t seed);

enum class View { base, weak, strong };

/// ReLU(A * ReLU(A * H0 * W1) * W2) over the normalized adjacency A.
diff::Var gcn_forward(const graph::ResidueGraph& g, const BranchWeights& w);

/// [mean_rows(H_ab) | mean_rows(H_ag)] as a 1 x 2*d_out row. Weak and strong
/// views augment both graphs first, with streams derived from `aug_seed`.
diff::Var encode_pair(const graph::PairGraphs& pair, const EncoderWeights& w, View view, std::uint64_t aug_seed = 0);

/// Rows of `pairs` encoded in order and stacked.
diff::Var encode_batch(std::span<const graph::PairGraphs* const> pairs, const EncoderWeights& w, View view,
                       std::span<const std::uint64_t> aug_seeds = {});

diff::Var class_logits(const diff::Var& e, const EncoderWeights& w);
/// Row-wise softmax(e * W + b).
diff::Var classify(const diff::Var& e, const EncoderWeights& w);

} // namespace ablist::encoder
