#pragma once

#include <ablist/diff/optim.hpp>
#include <ablist/encoder/encoder.hpp>
#include <ablist/listsample/listsample.hpp>
#include <ablist/ranker/ranker.hpp>

#include <optional>

namespace ablist::ranker {

enum class RankLoss { listmle, mse };

struct FinetuneConfig {
    std::size_t epochs = 50;
    std::size_t batch = 16;     // lists per step
    double lr = 1e-3;
    double weight_decay = 0.3;  // decoupled (AdamW)
    bool freeze_encoder = false;
    RankLoss loss = RankLoss::listmle;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Pair graphs indexed by pair id.
using GraphTable = std::vector<const graph::PairGraphs*>;

/// Joint encoder + ranker training with Adam over mini-batches of lists.
/// Members are embedded with the base (unaugmented) view.
class Finetuner {
public:
    Finetuner(FinetuneConfig cfg, encoder::EncoderWeights enc, RankerParams rank, GraphTable graphs);

    /// One shuffled pass over `lists` for 1-based epoch `t`; returns the mean
    /// per-list loss.
    double run_epoch(std::span<const listsample::RankingList> lists, std::size_t t);

    const encoder::EncoderWeights& encoder() const { return enc_; }
    const RankerParams& ranker() const { return rank_; }
    diff::Optimizer& optimizer() { return optimizer_; }

private:
    std::vector<diff::Var> trainable() const;
    diff::Var embed(std::span<const std::uint32_t> ids);

    FinetuneConfig cfg_;
    encoder::EncoderWeights enc_;
    RankerParams rank_;
    GraphTable graphs_;
    diff::Optimizer optimizer_;
    std::vector<std::optional<diff::Tensor>> frozen_;   // per pair id, when the encoder is frozen
};

/// Base-view embeddings (1 x 2*d_out rows) of every listed pair, evaluated on
/// `jobs` threads.
std::vector<diff::Tensor> embed_pairs(std::span<const std::uint32_t> ids, const encoder::EncoderWeights& enc,
                                      const GraphTable& graphs, std::size_t jobs);

/// Eval-mode scores for each list, parallel over `jobs` threads. Output order
/// follows `lists`.
std::vector<ScoredList> score_lists(std::span<const listsample::RankingList> lists, const encoder::EncoderWeights& enc,
                                    const RankerParams& rank, const GraphTable& graphs, std::size_t jobs);

} // namespace ablist::ranker
