#include <ablist/cli/pipeline.hpp>

#include <ablist/diff/rng.hpp>
#include <ablist/graph/features.hpp>
#include <ablist/util/text.hpp>

#include <map>
#include <ostream>
#include <stdexcept>

namespace ablist::cli {

namespace {

enum : std::uint64_t { kSynth = 11, kSplit, kEncoderInit, kPretrain, kHandoff, kSampleTrain, kSampleTest };

std::vector<diff::Var> params_from(const Checkpoint& c, const std::vector<std::string>& names) {
    std::vector<diff::Var> out;
    for (const auto& n : names) out.push_back(diff::Var::parameter(c.get(n)));
    return out;
}

std::vector<std::string> encoder_names() {
    const auto raw = encoder::EncoderWeights::names();
    return {raw.begin(), raw.end()};
}

void append(Checkpoint& c, const std::vector<std::string>& names, const std::vector<diff::Var>& vars) {
    for (std::size_t i = 0; i < names.size(); ++i) c.tensors.push_back({names[i], vars[i].value()});
}

/// Deep copy, so a stage never mutates tensors it was handed.
encoder::EncoderWeights clone(const encoder::EncoderWeights& w) {
    std::vector<diff::Var> v;
    for (const auto& p : w.list()) v.push_back(diff::Var::parameter(p.value()));
    return encoder::EncoderWeights::from_list(v);
}

} // namespace

std::uint64_t stage_seed(const RunConfig& cfg, std::uint64_t tag) { return diff::derive_seed(cfg.seed, {tag}); }

synth::Generated run_gen(const RunConfig& cfg) {
    auto s = cfg.synth;
    s.seed = stage_seed(cfg, kSynth);
    return synth::gen_dataset(s);
}

std::vector<graph::PairGraphs> build_graphs(const synth::Dataset& d) {
    const graph::SyntheticFeatures features;
    std::vector<graph::PairGraphs> out;
    out.reserve(d.pairs.size());
    for (const auto& p : d.pairs) {
        if (p.id != out.size()) throw std::invalid_argument("dataset: pair ids must be 0..n-1 in order");
        out.push_back(graph::build_pair_graphs(p, features));
    }
    return out;
}

ranker::GraphTable graph_table(const std::vector<graph::PairGraphs>& graphs) {
    ranker::GraphTable t;
    for (const auto& g : graphs) t.push_back(&g);
    return t;
}

listsample::Split run_split(const RunConfig& cfg, const synth::Dataset& d) {
    auto s = cfg.split;
    s.seed = stage_seed(cfg, kSplit);
    return listsample::make_splits(d.pairs, s);
}

EncoderStage run_pretrain(const RunConfig& cfg, const synth::Dataset& d, const std::vector<graph::PairGraphs>& graphs,
                          const listsample::Split& split, const synth::OracleTable* oracle, std::ostream* log) {
    auto pc = cfg.pretrain;
    pc.seed = stage_seed(cfg, kPretrain);
    std::vector<const graph::PairGraphs*> samples;
    std::vector<std::optional<double>> labels;
    for (auto id : split.train) {
        samples.push_back(&graphs.at(id));
        labels.push_back(d.pairs.at(id).affinity);
    }
    EncoderStage out = untrained_encoder(cfg);
    pretrain::Pretrainer trainer(pc, out.weights, std::move(samples), std::move(labels));
    if (oracle) {
        std::vector<std::size_t> columns;
        for (auto id : split.train) {
            columns.push_back(pretrain::class_column(pretrain::discretize_affinity(oracle->at(id).y, trainer.thresholds())));
        }
        trainer.attach_oracle(std::move(columns));
    }
    for (std::size_t t = 1; t <= pc.epochs; ++t) {
        out.epochs.push_back(trainer.run_epoch(t));
        if (log) pretrain::write_loss_line(*log, out.epochs.back());
    }
    out.weights = trainer.weights();
    return out;
}

EncoderStage untrained_encoder(const RunConfig& cfg) {
    EncoderStage s;
    s.weights = encoder::init_encoder(cfg.encoder, stage_seed(cfg, kEncoderInit));
    s.handoff.seed(stage_seed(cfg, kHandoff));
    return s;
}

std::vector<listsample::RankingList> run_sample(const RunConfig& cfg, const synth::Dataset& d,
                                                const listsample::Split& split, Part part,
                                                const synth::OracleTable* oracle,
                                                std::optional<listsample::SamplerConfig> sampler) {
    std::mt19937_64 rng(stage_seed(cfg, part == Part::train ? kSampleTrain : kSampleTest));
    if (part == Part::train) {
        const auto ctx = listsample::SampleContext::from_pairs(d.pairs, split.train);
        return listsample::sample_epoch(ctx, sampler.value_or(cfg.train_sampler()), cfg.train_lists, rng);
    }
    if (!oracle) throw std::invalid_argument("sample: test lists need the oracle table");
    std::vector<listsample::Item> items;
    for (auto id : split.test) {
        const auto& p = d.pairs.at(id);
        items.push_back({p.id, oracle->at(id).y, p.family, p.ag.sequence});
    }
    const listsample::SampleContext ctx(std::move(items));
    return listsample::sample_epoch(ctx, sampler.value_or(cfg.test_sampler()), cfg.test_lists, rng);
}

RankStage run_finetune(const RunConfig& cfg, const std::vector<graph::PairGraphs>& graphs,
                       std::span<const listsample::RankingList> lists, const EncoderStage& init, std::ostream* log) {
    RankStage out;
    out.handoff = init.handoff;
    auto rc = cfg.ranker;
    rc.d_in = cfg.encoder.embedding_width();
    auto fc = cfg.finetune;
    const std::uint64_t ranker_seed = out.handoff();
    fc.seed = out.handoff();
    ranker::Finetuner tuner(fc, clone(init.weights), ranker::init_ranker(rc, ranker_seed), graph_table(graphs));
    for (std::size_t t = 1; t <= fc.epochs; ++t) {
        out.epoch_loss.push_back(tuner.run_epoch(lists, t));
        if (log) *log << t << '\t' << util::format_double(out.epoch_loss.back()) << '\n';
    }
    out.encoder = tuner.encoder();
    out.ranker = tuner.ranker();
    return out;
}

std::vector<ranker::ScoredList> score(const std::vector<graph::PairGraphs>& graphs,
                                      std::span<const listsample::RankingList> lists, const encoder::EncoderWeights& enc,
                                      const ranker::RankerParams& rank, std::size_t jobs) {
    return ranker::score_lists(lists, enc, rank, graph_table(graphs), jobs);
}

Evaluation evaluate_scored(std::span<const listsample::RankingList> lists, std::vector<ranker::ScoredList> scored,
                           std::size_t recall_top) {
    std::map<std::uint64_t, const ranker::ScoredList*> by_id;
    for (auto& s : scored) {
        if (!by_id.emplace(s.list_id, &s).second) throw std::invalid_argument("evaluate: duplicate scored list " + std::to_string(s.list_id));
    }
    std::vector<metrics::ListView> views;
    std::vector<ranker::ScoredList> ordered;
    std::map<std::uint32_t, double> strength;
    for (const auto& l : lists) {
        const auto it = by_id.find(l.list_id);
        if (it == by_id.end()) throw std::invalid_argument("evaluate: no scores for list " + std::to_string(l.list_id));
        auto s = *it->second;
        if (s.scores.size() != l.pairs.size()) throw std::invalid_argument("evaluate: list " + std::to_string(l.list_id) + " has the wrong score count");
        s.pairs = l.pairs;
        ordered.push_back(std::move(s));
        for (std::size_t i = 0; i < l.pairs.size(); ++i) strength[l.pairs[i]] = -l.labels[i];
    }
    for (std::size_t i = 0; i < lists.size(); ++i) views.push_back({ordered[i].scores, lists[i].labels});

    Evaluation e;
    e.report = metrics::evaluate(views);
    std::vector<std::uint32_t> candidates;
    std::vector<double> strengths;
    std::map<std::uint32_t, std::size_t> index;
    for (const auto& [id, s] : strength) {
        index[id] = candidates.size();
        candidates.push_back(id);
        strengths.push_back(s);
    }
    std::vector<std::size_t> ranking;
    for (auto id : ranker::aggregate_global_rank(ordered, candidates)) ranking.push_back(index.at(id));
    e.curves = metrics::screening_curves(ranking, strengths, std::min(recall_top, candidates.size()));
    e.scored = std::move(ordered);
    return e;
}

void write_detail(std::ostream& out, const Evaluation& e) {
    out << "# list_id\ttau\texact\ttop1\tconcordant\tdiscordant\n";
    for (std::size_t i = 0; i < e.report.lists.size(); ++i) {
        const auto& r = e.report.lists[i];
        out << e.scored[i].list_id << '\t' << util::format_double(r.tau) << '\t' << r.exact << '\t' << r.top1 << '\t'
            << r.concordant << '\t' << r.discordant << '\n';
    }
}

void write_curves(std::ostream& out, const metrics::ScreeningCurves& c) {
    out << "# n\thit_rate\trecall\n";
    for (std::size_t i = 0; i < c.hit_rate.size(); ++i) {
        out << i + 1 << '\t' << util::format_double(c.hit_rate[i]) << '\t' << util::format_double(c.recall[i]) << '\n';
    }
}

Checkpoint pretrain_checkpoint(const RunConfig& cfg, const EncoderStage& s) {
    Checkpoint c;
    c.stage = Stage::pretrain;
    c.config_hash = config_hash(cfg, Stage::pretrain);
    append(c, encoder_names(), s.weights.list());
    c.rng_state = save_rng(s.handoff);
    return c;
}

EncoderStage encoder_from_checkpoint(const Checkpoint& c) {
    EncoderStage s;
    s.weights = encoder::EncoderWeights::from_list(params_from(c, encoder_names()));
    s.handoff = load_rng(c.rng_state);
    return s;
}

Checkpoint rank_checkpoint(const RunConfig& cfg, const RankStage& s) {
    Checkpoint c;
    c.stage = Stage::rank;
    c.config_hash = config_hash(cfg, Stage::rank);
    append(c, encoder_names(), s.encoder.list());
    append(c, s.ranker.names(), s.ranker.list());
    c.rng_state = save_rng(s.handoff);
    return c;
}

RankStage rank_from_checkpoint(const RunConfig& cfg, const Checkpoint& c) {
    RankStage s;
    s.encoder = encoder::EncoderWeights::from_list(params_from(c, encoder_names()));
    auto rc = cfg.ranker;
    rc.d_in = cfg.encoder.embedding_width();
    const auto names = ranker::init_ranker(rc, 0).names();
    s.ranker = ranker::RankerParams::from_list(rc, params_from(c, names));
    s.handoff = load_rng(c.rng_state);
    return s;
}

} // namespace ablist::cli
