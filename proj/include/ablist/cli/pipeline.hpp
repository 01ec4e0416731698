#pragma once

#include <ablist/cli/checkpoint.hpp>
#include <ablist/cli/config.hpp>
#include <ablist/metrics/metrics.hpp>

#include <iosfwd>
#include <random>
#include <vector>

namespace ablist::cli {

// In-memory stages of the pipeline. The commands wrap these with file I/O;
// the acceptance suite calls them directly.

/// Seed of stream `tag` under the run seed.
std::uint64_t stage_seed(const RunConfig& cfg, std::uint64_t tag);

synth::Generated run_gen(const RunConfig& cfg);

/// Contact graphs with synthetic node features, indexed by pair id.
std::vector<graph::PairGraphs> build_graphs(const synth::Dataset& d);
ranker::GraphTable graph_table(const std::vector<graph::PairGraphs>& graphs);

listsample::Split run_split(const RunConfig& cfg, const synth::Dataset& d);

struct EncoderStage {
    encoder::EncoderWeights weights;
    std::mt19937_64 handoff;   // seeds the rank stage
    std::vector<pretrain::EpochReport> epochs;
};

/// PU pre-training over the train split. Labels of test pairs are never
/// read; `oracle` (optional) only feeds the pseudo-label accuracy column.
/// One loss line per epoch goes to `log` when given.
EncoderStage run_pretrain(const RunConfig& cfg, const synth::Dataset& d, const std::vector<graph::PairGraphs>& graphs,
                          const listsample::Split& split, const synth::OracleTable* oracle, std::ostream* log);

/// Freshly initialized encoder with the same handoff stream: the no-PU
/// variant.
EncoderStage untrained_encoder(const RunConfig& cfg);

enum class Part { train, test };

/// Train lists come from labeled train-split pairs. Test lists are
/// homologous only and labeled from the oracle's measured values.
std::vector<listsample::RankingList> run_sample(const RunConfig& cfg, const synth::Dataset& d,
                                                const listsample::Split& split, Part part,
                                                const synth::OracleTable* oracle,
                                                std::optional<listsample::SamplerConfig> sampler = std::nullopt);

struct RankStage {
    encoder::EncoderWeights encoder;
    ranker::RankerParams ranker;
    std::mt19937_64 handoff;
    std::vector<double> epoch_loss;
};

/// Joint fine-tuning from `init`; one `epoch<TAB>loss` line per epoch to `log`.
RankStage run_finetune(const RunConfig& cfg, const std::vector<graph::PairGraphs>& graphs,
                       std::span<const listsample::RankingList> lists, const EncoderStage& init, std::ostream* log);

struct Evaluation {
    metrics::EvalReport report;
    std::vector<ranker::ScoredList> scored;
    metrics::ScreeningCurves curves;
};

std::vector<ranker::ScoredList> score(const std::vector<graph::PairGraphs>& graphs,
                                      std::span<const listsample::RankingList> lists, const encoder::EncoderWeights& enc,
                                      const ranker::RankerParams& rank, std::size_t jobs);

/// Metrics of `scored` against the labels of `lists` (matched by list id),
/// plus screening curves of the aggregated global ranking over every listed
/// pair.
Evaluation evaluate_scored(std::span<const listsample::RankingList> lists, std::vector<ranker::ScoredList> scored,
                           std::size_t recall_top);

void write_detail(std::ostream& out, const Evaluation& e);
void write_curves(std::ostream& out, const metrics::ScreeningCurves& c);

Checkpoint pretrain_checkpoint(const RunConfig& cfg, const EncoderStage& s);
EncoderStage encoder_from_checkpoint(const Checkpoint& c);
Checkpoint rank_checkpoint(const RunConfig& cfg, const RankStage& s);
RankStage rank_from_checkpoint(const RunConfig& cfg, const Checkpoint& c);

} // namespace ablist::cli
