#include <ablist/encoder/encoder.hpp>

#include <ablist/diff/ops.hpp>
#include <ablist/diff/rng.hpp>

#include <cmath>
#include <random>
#include <stdexcept>

namespace ablist::encoder {

using diff::Tensor;
using diff::Var;

void EncoderConfig::validate() const {
    if (d_in == 0 || d_hidden == 0 || d_out == 0 || classes < 2) {
        throw std::invalid_argument("encoder: dimensions must be positive and classes >= 2");
    }
}

EncoderWeights EncoderWeights::from_list(std::span<const Var> v) {
    if (v.size() != kCount) throw std::invalid_argument("encoder: expected 6 weight tensors");
    return {{v[0], v[1]}, {v[2], v[3]}, v[4], v[5]};
}

std::vector<const char*> EncoderWeights::names() {
    return {"encoder.ab.w1", "encoder.ab.w2", "encoder.ag.w1", "encoder.ag.w2", "encoder.cls.w", "encoder.cls.b"};
}

namespace {

Var glorot(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
    std::uniform_real_distribution<double> u(-limit, limit);
    Tensor t(rows, cols);
    for (auto& v : t.data()) v = u(rng);
    return Var::parameter(std::move(t));
}

} // namespace

EncoderWeights init_encoder(const EncoderConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    std::mt19937_64 rng(seed);
    EncoderWeights w;
    w.ab.w1 = glorot(cfg.d_in, cfg.d_hidden, rng);
    w.ab.w2 = glorot(cfg.d_hidden, cfg.d_out, rng);
    w.ag.w1 = glorot(cfg.d_in, cfg.d_hidden, rng);
    w.ag.w2 = glorot(cfg.d_hidden, cfg.d_out, rng);
    w.cls_w = glorot(cfg.embedding_width(), cfg.classes, rng);
    w.cls_b = Var::parameter(Tensor(1, cfg.classes));
    return w;
}

Var gcn_forward(const graph::ResidueGraph& g, const BranchWeights& w) {
    if (g.node_count == 0) throw std::invalid_argument("gcn_forward: empty graph");
    if (g.features.cols() != w.w1.rows()) {
        throw diff::ShapeError("gcn_forward: feature width " + std::to_string(g.features.cols()) +
                               " does not match W1 rows " + std::to_string(w.w1.rows()));
    }
    const Var a = Var::constant(g.adjacency);
    const Var h0 = Var::constant(g.features);
    // A * (H W) keeps the sparse operand on the left of each product.
    const Var h1 = diff::relu(diff::matmul(a, diff::matmul(h0, w.w1)));
    return diff::relu(diff::matmul(a, diff::matmul(h1, w.w2)));
}

Var encode_pair(const graph::PairGraphs& pair, const EncoderWeights& w, View view, std::uint64_t aug_seed) {
    auto encode = [&](const graph::ResidueGraph& g, const BranchWeights& bw, std::uint64_t chain) {
        if (view == View::base) return diff::mean_rows(gcn_forward(g, bw));
        const auto seed = diff::derive_seed(aug_seed, {chain});
        const auto cfg = view == View::weak ? graph::AugmentConfig::weak(seed) : graph::AugmentConfig::strong(seed);
        return diff::mean_rows(gcn_forward(graph::augment(g, cfg), bw));
    };
    const Var parts[] = {encode(pair.ab, w.ab, 0), encode(pair.ag, w.ag, 1)};
    return diff::concat_cols(parts);
}

Var encode_batch(std::span<const graph::PairGraphs* const> pairs, const EncoderWeights& w, View view,
                 std::span<const std::uint64_t> aug_seeds) {
    if (pairs.empty()) throw std::invalid_argument("encode_batch: empty batch");
    if (view != View::base && aug_seeds.size() != pairs.size()) {
        throw std::invalid_argument("encode_batch: augmented views need one seed per pair");
    }
    std::vector<Var> rows;
    rows.reserve(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        rows.push_back(encode_pair(*pairs[i], w, view, view == View::base ? 0 : aug_seeds[i]));
    }
    return diff::concat_rows(rows);
}

Var class_logits(const Var& e, const EncoderWeights& w) { return diff::add_row(diff::matmul(e, w.cls_w), w.cls_b); }

Var classify(const Var& e, const EncoderWeights& w) { return diff::softmax(class_logits(e, w)); }

} // namespace ablist::encoder
