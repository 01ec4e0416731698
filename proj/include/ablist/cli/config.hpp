#pragma once

#include <ablist/encoder/encoder.hpp>
#include <ablist/listsample/listsample.hpp>
#include <ablist/pretrain/pretrainer.hpp>
#include <ablist/ranker/finetune.hpp>
#include <ablist/synth/synth.hpp>

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ablist::cli {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Every tunable of a pipeline run, grouped by config section. Grammar and
/// key list are in docs/formats.md.
struct RunConfig {
    std::uint64_t seed = 0;

    synth::SynthConfig synth;
    listsample::SplitConfig split;

    // Sampler values left unset follow SamplerConfig::for_regime(split.regime).
    std::optional<double> y_cutoff;
    std::optional<double> homologous_ratio;
    double delta_seq = 0.9;
    std::size_t list_k = 5;
    std::size_t train_lists = 400;
    std::size_t test_lists = 200;

    encoder::EncoderConfig encoder;
    pretrain::PretrainConfig pretrain;
    ranker::RankerConfig ranker;
    ranker::FinetuneConfig finetune;

    std::size_t recall_top = 3;

    /// Training sampler: the split regime with the overrides above.
    listsample::SamplerConfig train_sampler() const;
    /// Test sampler: homologous lists only, same homology and margin rules.
    listsample::SamplerConfig test_sampler() const;

    void validate() const;
};

/// Named default sets: "desk-small" (tests and demos) and "reference" (full hyperparameter table).
RunConfig preset(std::string_view name);

/// `section.key = value` pairs with canonical value spelling, sorted.
std::map<std::string, std::string> to_entries(const RunConfig& cfg);

/// Applies one `section.key = value` setting. Throws ConfigError on unknown
/// keys and malformed values.
void set_entry(RunConfig& cfg, std::string_view key, std::string_view value);

/// Applies an INI-style file on top of `cfg`; `origin` prefixes diagnostics.
void apply_config_text(RunConfig& cfg, std::istream& in, std::string_view origin);

/// Applies ABLIST_<SECTION>_<KEY> variables from `env` (a NULL-terminated
/// environ-style array).
void apply_env(RunConfig& cfg, char** env);

enum class Stage : std::uint8_t { pretrain = 0, rank = 1 };

/// FNV-1a over the canonical entries that determine the outputs of `stage`:
/// run, synth, split, encoder and pretrain; plus sampler and rank for the
/// rank stage.
std::uint64_t config_hash(const RunConfig& cfg, Stage stage);

std::string_view to_string(Stage s);

} // namespace ablist::cli
