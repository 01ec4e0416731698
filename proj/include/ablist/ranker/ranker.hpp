#pragma once

#include <ablist/diff/var.hpp>

#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace ablist::ranker {

/// isab: the attention stack. mlp: each ISAB layer replaced by a per-row
/// two-layer perceptron (the attention ablation).
enum class Mixer { isab, mlp };

struct RankerConfig {
    std::size_t d_in = 128;
    std::size_t d_r = 64;
    std::size_t layers = 2;
    std::size_t inducing = 5;
    std::size_t heads = 4;
    double dropout = 0.2;
    Mixer mixer = Mixer::isab;

    void validate() const;
};

struct AttentionWeights {
    diff::Var wq, bq, wk, bk, wv, bv, wo, bo;   // d_r x d_r weights, 1 x d_r biases
};

/// ReLU(X W1 + b1), dropout, then W2 + b2.
struct FeedForward {
    diff::Var w1, b1, w2, b2;
};

struct IsabLayer {
    diff::Var inducing;          // M x d_r (unused by the mlp mixer)
    AttentionWeights to_inducing;
    AttentionWeights from_inducing;
    FeedForward ff;
};

struct RankerParams {
    RankerConfig config;
    diff::Var proj_w, proj_b;    // d_in x d_r, 1 x d_r
    std::vector<IsabLayer> layers;
    diff::Var score_w, score_b;  // d_r x 1, 1 x 1

    /// Trainable tensors in a fixed order; the mlp mixer skips attention and
    /// inducing points.
    std::vector<diff::Var> list() const;
    std::vector<std::string> names() const;
    static RankerParams from_list(const RankerConfig& config, std::span<const diff::Var> v);
};

/// Glorot-uniform matrices, zero biases, N(0, 1) inducing points.
RankerParams init_ranker(const RankerConfig& cfg, std::uint64_t seed);

/// Dropout state for a forward pass. A null rng means evaluation mode.
struct Mode {
    std::mt19937_64* rng = nullptr;
    double dropout = 0.0;
    bool training() const { return rng != nullptr && dropout > 0.0; }
};

/// Multi-head scaled dot-product attention of the rows of `q` over the rows
/// of `kv`, heads concatenated and output-projected. Attention weights of
/// each head are appended to `weights` when given.
diff::Var mha(const diff::Var& q, const diff::Var& kv, const AttentionWeights& w, std::size_t heads, Mode mode = {},
              std::vector<diff::Tensor>* weights = nullptr);

/// H = MHA(I, Z, Z) + I;  Z' = rFF(MHA(Z, H, H) + Z).
diff::Var isab_layer(const diff::Var& z, const IsabLayer& layer, std::size_t heads, Mode mode = {});

/// K x 1 scores for the K x d_in member embeddings of one list.
diff::Var score_list(const diff::Var& e, const RankerParams& p, Mode mode = {});

/// Plackett-Luce negative log-likelihood of the true order (strongest, i.e.
/// lowest log-Kd, first; ties by index). `r` is K x 1.
diff::Var listmle_loss(const diff::Var& r, std::span<const double> labels);

/// Mean of (r_i - s_i)^2 with strength s = -y: the regression ablation.
diff::Var mse_loss(const diff::Var& r, std::span<const double> labels);

struct ScoredList {
    std::uint64_t list_id = 0;
    std::vector<std::uint32_t> pairs;
    std::vector<double> scores;
    std::vector<std::size_t> perm;   // positions in `pairs`, strongest first
};

ScoredList make_scored(std::uint64_t list_id, std::vector<std::uint32_t> pairs, std::vector<double> scores);

/// Candidates ordered by descending mean score over all their list
/// occurrences, ties by id. Throws when a candidate never occurs.
std::vector<std::uint32_t> aggregate_global_rank(std::span<const ScoredList> lists,
                                                 std::span<const std::uint32_t> candidates);

/// `list_id<TAB>r1,...,rK<TAB>perm` per line, perm as 0-based positions.
void write_scored_lists(std::ostream& out, std::span<const ScoredList> lists);
std::vector<ScoredList> read_scored_lists(std::istream& in);

} // namespace ablist::ranker
