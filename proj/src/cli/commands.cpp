#include <ablist/cli/commands.hpp>

#include <ablist/cli/pipeline.hpp>
#include <ablist/util/text.hpp>

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace ablist::cli {

namespace fs = std::filesystem;

namespace {

class MissingFile : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InsufficientData : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Globals {
    std::string config;
    std::string preset = "desk-small";
    std::optional<std::uint64_t> seed;
    std::size_t jobs = 1;
};

RunConfig resolve(const Globals& g, char** env) {
    RunConfig cfg = preset(g.preset);
    if (!g.config.empty()) {
        std::ifstream in(g.config);
        if (!in) throw MissingFile("config file not found: " + g.config);
        apply_config_text(cfg, in, g.config);
    }
    apply_env(cfg, env);
    if (g.seed) cfg.seed = *g.seed;
    cfg.validate();
    return cfg;
}

std::ifstream open_in(const std::string& path, std::ios::openmode mode = std::ios::in) {
    std::ifstream in(path, mode);
    if (!in) throw MissingFile("input file not found: " + path);
    return in;
}

synth::Dataset load_dataset(const std::string& path) {
    auto in = open_in(path);
    return synth::read_dataset(in);
}

synth::OracleTable load_oracle(const std::string& path) {
    auto in = open_in(path);
    return synth::read_oracle(in);
}

std::vector<listsample::RankingList> load_lists(const std::string& path) {
    auto in = open_in(path);
    return listsample::read_lists(in);
}

void save_lists(const std::string& path, const std::vector<listsample::RankingList>& lists) {
    write_atomic(path, [&](std::ostream& o) { listsample::write_lists(o, lists); });
}

void save_checkpoint(const std::string& path, const Checkpoint& c) {
    write_atomic(path, [&](std::ostream& o) { write_checkpoint(o, c); }, true);
}

/// Sampler failures surface as std::runtime_error from listsample.
template <class Fn>
auto sampling(Fn fn) {
    try {
        return fn();
    } catch (const std::runtime_error& e) {
        throw InsufficientData(e.what());
    }
}

/// Collects loss lines in memory so the log file appears atomically.
struct LogSink {
    std::string path;
    std::ostringstream buffer;
    std::ostream* stream() { return path.empty() ? nullptr : &buffer; }
    void flush() {
        if (!path.empty()) write_atomic(path, [&](std::ostream& o) { o << buffer.str(); });
    }
};

void emit_evaluation(const Evaluation& e, const std::string& report, const std::string& detail,
                     const std::string& curves, const std::string& scored_out) {
    const auto summary = metrics::format_summary(e.report);
    if (report.empty()) std::cout << summary;
    else write_atomic(report, [&](std::ostream& o) { o << summary; });
    if (!detail.empty()) write_atomic(detail, [&](std::ostream& o) { write_detail(o, e); });
    if (!curves.empty()) write_atomic(curves, [&](std::ostream& o) { write_curves(o, e.curves); });
    if (!scored_out.empty()) write_atomic(scored_out, [&](std::ostream& o) { ranker::write_scored_lists(o, e.scored); });
}

int fail(ExitCode code, std::string_view kind, std::string_view what) {
    std::cerr << "ablist: " << kind << ": " << what << '\n';
    return code;
}

} // namespace

int run_cli(int argc, char** argv, char** env) {
    CLI::App app{"Listwise antibody-antigen affinity ranking on synthetic data"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--config", g.config, "INI-style config file applied over the preset");
    app.add_option("--preset", g.preset, "desk-small or reference")->capture_default_str();
    app.add_option("--seed", g.seed, "Run seed; every random stream derives from it");
    app.add_option("--jobs", g.jobs, "Worker threads for evaluation")->check(CLI::PositiveNumber)->capture_default_str();

    std::string data, oracle, out, log, lists, init, checkpoint, scores, report, detail, curves, scored_out, part, variant;

    auto* gen = app.add_subcommand("gen", "Generate a synthetic dataset and its oracle table");
    gen->add_option("--out", out, "Dataset file")->required();
    gen->add_option("--oracle", oracle, "Oracle table file")->required();

    auto* pre = app.add_subcommand("pretrain", "PU pre-training on the train split");
    pre->add_option("--data", data)->required();
    pre->add_option("--out", out, "Pretrain checkpoint")->required();
    pre->add_option("--log", log, "Per-epoch loss log");
    pre->add_option("--oracle", oracle, "Oracle table, only for the pseudo_acc column");

    auto* sample = app.add_subcommand("sample", "Sample ranking lists from one split");
    sample->add_option("--data", data)->required();
    sample->add_option("--split", part, "train or test")->required()->check(CLI::IsMember({"train", "test"}));
    sample->add_option("--out", out, "List file")->required();
    sample->add_option("--oracle", oracle, "Oracle table (required for test lists)");

    auto* fine = app.add_subcommand("finetune", "Joint encoder + ranker training with ListMLE");
    fine->add_option("--data", data)->required();
    fine->add_option("--lists", lists, "Training list file")->required();
    fine->add_option("--init", init, "Pretrain checkpoint")->required();
    fine->add_option("--out", out, "Rank checkpoint")->required();
    fine->add_option("--log", log, "Per-epoch loss log");

    auto* eval = app.add_subcommand("evaluate", "Score lists and report the five metrics");
    eval->add_option("--lists", lists, "Labeled list file")->required();
    auto* ck = eval->add_option("--checkpoint", checkpoint, "Rank checkpoint");
    auto* sc = eval->add_option("--scores", scores, "Precomputed scored-list file");
    ck->excludes(sc);
    eval->add_option("--data", data, "Dataset (required with --checkpoint)");
    eval->add_option("--report", report, "Summary file (stdout when omitted)");
    eval->add_option("--detail", detail, "Per-list detail file");
    eval->add_option("--curves", curves, "Screening curve file");
    eval->add_option("--scored-out", scored_out, "Write the scored lists");

    auto* ablate = app.add_subcommand("ablate", "Run one ablation variant end to end and report");
    ablate->add_option("--variant", variant)
        ->required()
        ->check(CLI::IsMember({"full", "no-pu", "mse", "mlp", "abrank-style-sampling"}));
    ablate->add_option("--data", data)->required();
    ablate->add_option("--oracle", oracle, "Oracle table for the test lists")->required();
    ablate->add_option("--report", report, "Summary file (stdout when omitted)");
    ablate->add_option("--curves", curves, "Screening curve file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        const RunConfig cfg = resolve(g, env);

        if (*gen) {
            const auto generated = run_gen(cfg);
            write_atomic(out, [&](std::ostream& o) { synth::write_dataset(o, generated.dataset); });
            write_atomic(oracle, [&](std::ostream& o) { synth::write_oracle(o, generated.oracle); });
        } else if (*pre) {
            const auto d = load_dataset(data);
            const auto table = oracle.empty() ? std::optional<synth::OracleTable>{} : load_oracle(oracle);
            const auto graphs = build_graphs(d);
            LogSink sink{log, {}};
            const auto stage = run_pretrain(cfg, d, graphs, run_split(cfg, d), table ? &*table : nullptr, sink.stream());
            save_checkpoint(out, pretrain_checkpoint(cfg, stage));
            sink.flush();
        } else if (*sample) {
            const auto d = load_dataset(data);
            const bool test = part == "test";
            if (test && oracle.empty()) throw MissingFile("test lists need --oracle");
            const auto table = test ? load_oracle(oracle) : synth::OracleTable{};
            const auto result = sampling([&] {
                return run_sample(cfg, d, run_split(cfg, d), test ? Part::test : Part::train, test ? &table : nullptr);
            });
            save_lists(out, result);
        } else if (*fine) {
            const auto d = load_dataset(data);
            const auto train = load_lists(lists);
            const auto start = encoder_from_checkpoint(load_checkpoint(init, Stage::pretrain, config_hash(cfg, Stage::pretrain)));
            const auto graphs = build_graphs(d);
            LogSink sink{log, {}};
            const auto stage = run_finetune(cfg, graphs, train, start, sink.stream());
            save_checkpoint(out, rank_checkpoint(cfg, stage));
            sink.flush();
        } else if (*eval) {
            const auto test = load_lists(lists);
            std::vector<ranker::ScoredList> scored;
            if (!scores.empty()) {
                auto in = open_in(scores);
                scored = ranker::read_scored_lists(in);
            } else if (!checkpoint.empty()) {
                if (data.empty()) throw MissingFile("--checkpoint needs --data");
                const auto d = load_dataset(data);
                const auto stage =
                    rank_from_checkpoint(cfg, load_checkpoint(checkpoint, Stage::rank, config_hash(cfg, Stage::rank)));
                scored = score(build_graphs(d), test, stage.encoder, stage.ranker, g.jobs);
            } else {
                throw MissingFile("evaluate needs --checkpoint or --scores");
            }
            emit_evaluation(evaluate_scored(test, std::move(scored), cfg.recall_top), report, detail, curves, scored_out);
        } else if (*ablate) {
            auto vcfg = cfg;
            std::optional<listsample::SamplerConfig> sampler;
            if (variant == "mse") vcfg.finetune.loss = ranker::RankLoss::mse;
            if (variant == "mlp") vcfg.ranker.mixer = ranker::Mixer::mlp;
            if (variant == "abrank-style-sampling") {
                sampler = vcfg.train_sampler();
                sampler->delta_seq = 0.0;
                sampler->homologous_ratio = 1.0;
            }
            const auto d = load_dataset(data);
            const auto table = load_oracle(oracle);
            const auto graphs = build_graphs(d);
            const auto split = run_split(vcfg, d);
            const auto train = sampling([&] { return run_sample(vcfg, d, split, Part::train, nullptr, sampler); });
            const auto test = sampling([&] { return run_sample(vcfg, d, split, Part::test, &table); });
            const auto start =
                variant == "no-pu" ? untrained_encoder(vcfg) : run_pretrain(vcfg, d, graphs, split, nullptr, nullptr);
            const auto stage = run_finetune(vcfg, graphs, train, start, nullptr);
            emit_evaluation(evaluate_scored(test, score(graphs, test, stage.encoder, stage.ranker, g.jobs), vcfg.recall_top),
                            report, "", curves, "");
        }
    } catch (const MissingFile& e) {
        return fail(kMissingFile, "missing file", e.what());
    } catch (const ConfigError& e) {
        return fail(kConfigViolation, "config violation", e.what());
    } catch (const CheckpointError& e) {
        return fail(kCheckpointMismatch, "checkpoint mismatch", e.what());
    } catch (const InsufficientData& e) {
        return fail(kInsufficientData, "insufficient data", e.what());
    } catch (const fs::filesystem_error& e) {
        return fail(kMissingFile, "missing file", e.what());
    } catch (const std::exception& e) {
        return fail(kFailure, "error", e.what());
    }
    return kOk;
}

} // namespace ablist::cli
