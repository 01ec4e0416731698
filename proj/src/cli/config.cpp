#include <ablist/cli/config.hpp>

#include <ablist/util/text.hpp>

#include <cctype>
#include <functional>
#include <istream>
#include <set>

namespace ablist::cli {

namespace {

struct Field {
    std::function<void(RunConfig&, std::string_view)> set;
    std::function<std::string(const RunConfig&)> get;
};

using Table = std::map<std::string, Field, std::less<>>;

std::string fmt(double v) { return util::format_double(v); }
std::string fmt(std::size_t v) { return std::to_string(v); }
std::string fmt(bool v) { return v ? "true" : "false"; }

template <class T>
T parse_value(std::string_view s);

template <>
double parse_value<double>(std::string_view s) {
    return util::parse_double(s);
}
template <>
std::size_t parse_value<std::size_t>(std::string_view s) {
    return util::parse_int<std::size_t>(s);
}
template <>
bool parse_value<bool>(std::string_view s) {
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw util::ParseError("not a boolean: '" + std::string(s) + "'");
}

/// Field bound to a plain member reachable through `access`.
template <class T, class Access>
Field plain(Access access) {
    return {[access](RunConfig& c, std::string_view v) { access(c) = parse_value<T>(v); },
            [access](const RunConfig& c) { return fmt(access(const_cast<RunConfig&>(c))); }};
}

/// Optional double where "auto" means unset.
template <class Access>
Field optional_double(Access access) {
    return {[access](RunConfig& c, std::string_view v) {
                if (v == "auto") access(c).reset();
                else access(c) = parse_value<double>(v);
            },
            [access](const RunConfig& c) {
                const auto& o = access(const_cast<RunConfig&>(c));
                return o ? fmt(*o) : std::string("auto");
            }};
}

/// Key that documents a fixed choice; any other value is rejected.
Field fixed(std::string value) {
    return {[value](RunConfig&, std::string_view v) {
                if (v != value) throw util::ParseError("only '" + value + "' is supported");
            },
            [value](const RunConfig&) { return value; }};
}

#define ABLIST_FIELD(T, expr) plain<T>([](RunConfig& c) -> auto& { return c.expr; })

const Table& table() {
    static const Table t = [] {
        Table m;
        m["run.seed"] = {[](RunConfig& c, std::string_view v) { c.seed = util::parse_int<std::uint64_t>(v); },
                         [](const RunConfig& c) { return std::to_string(c.seed); }};

        m["synth.families"] = ABLIST_FIELD(std::size_t, synth.families);
        m["synth.antigens_per_family"] = ABLIST_FIELD(std::size_t, synth.antigens_per_family);
        m["synth.antibodies_per_antigen"] = ABLIST_FIELD(std::size_t, synth.antibodies_per_antigen);
        m["synth.mutation_rate"] = ABLIST_FIELD(double, synth.mutation_rate);
        m["synth.ab_len_min"] = ABLIST_FIELD(std::size_t, synth.ab_len_min);
        m["synth.ab_len_max"] = ABLIST_FIELD(std::size_t, synth.ab_len_max);
        m["synth.ag_len_min"] = ABLIST_FIELD(std::size_t, synth.ag_len_min);
        m["synth.ag_len_max"] = ABLIST_FIELD(std::size_t, synth.ag_len_max);
        m["synth.labeled_fraction"] = ABLIST_FIELD(double, synth.labeled_fraction);
        m["synth.noise_sigma"] = ABLIST_FIELD(double, synth.noise_sigma);

        m["split.regime"] = {[](RunConfig& c, std::string_view v) { c.split.regime = listsample::parse_regime(v); },
                             [](const RunConfig& c) { return std::string(listsample::to_string(c.split.regime)); }};
        m["split.folds"] = ABLIST_FIELD(std::size_t, split.folds);
        m["split.fold"] = ABLIST_FIELD(std::size_t, split.fold);
        m["split.clusters"] = ABLIST_FIELD(std::size_t, split.clusters);
        m["split.test_share"] = ABLIST_FIELD(double, split.test_share);

        m["sampler.delta_seq"] = ABLIST_FIELD(double, delta_seq);
        m["sampler.y_cutoff"] = optional_double([](RunConfig& c) -> auto& { return c.y_cutoff; });
        m["sampler.homologous_ratio"] = optional_double([](RunConfig& c) -> auto& { return c.homologous_ratio; });
        m["sampler.k"] = ABLIST_FIELD(std::size_t, list_k);
        m["sampler.train_lists"] = ABLIST_FIELD(std::size_t, train_lists);
        m["sampler.test_lists"] = ABLIST_FIELD(std::size_t, test_lists);

        m["encoder.d_hidden"] = ABLIST_FIELD(std::size_t, encoder.d_hidden);
        m["encoder.d_out"] = ABLIST_FIELD(std::size_t, encoder.d_out);

        m["pretrain.optimizer"] = fixed("sgd");
        m["pretrain.epochs"] = ABLIST_FIELD(std::size_t, pretrain.epochs);
        m["pretrain.warmup"] = ABLIST_FIELD(std::size_t, pretrain.warmup);
        m["pretrain.batch"] = ABLIST_FIELD(std::size_t, pretrain.batch);
        m["pretrain.val_batch"] = ABLIST_FIELD(std::size_t, pretrain.val_batch);
        m["pretrain.val_fraction"] = ABLIST_FIELD(double, pretrain.val_fraction);
        m["pretrain.lr"] = ABLIST_FIELD(double, pretrain.lr);
        m["pretrain.meta_lr"] = ABLIST_FIELD(double, pretrain.meta.alpha);
        m["pretrain.delta_lr"] = ABLIST_FIELD(double, pretrain.meta.delta_lr);
        m["pretrain.meta_steps"] = ABLIST_FIELD(std::size_t, pretrain.meta.steps);
        m["pretrain.weight_decay"] = ABLIST_FIELD(double, pretrain.weight_decay);
        m["pretrain.momentum"] = ABLIST_FIELD(double, pretrain.momentum);
        m["pretrain.tau"] = ABLIST_FIELD(double, pretrain.tau);
        m["pretrain.knn"] = ABLIST_FIELD(std::size_t, pretrain.knn);
        m["pretrain.prototypes"] = ABLIST_FIELD(std::size_t, pretrain.prototypes);
        m["pretrain.rho_low"] = ABLIST_FIELD(double, pretrain.rho_low);
        m["pretrain.rho_high"] = ABLIST_FIELD(double, pretrain.rho_high);
        m["pretrain.confidence_filter"] = ABLIST_FIELD(bool, pretrain.confidence_filter);
        m["pretrain.beta"] = ABLIST_FIELD(double, pretrain.beta);

        m["rank.optimizer"] = fixed("adam");
        m["rank.epochs"] = ABLIST_FIELD(std::size_t, finetune.epochs);
        m["rank.batch"] = ABLIST_FIELD(std::size_t, finetune.batch);
        m["rank.lr"] = ABLIST_FIELD(double, finetune.lr);
        m["rank.weight_decay"] = ABLIST_FIELD(double, finetune.weight_decay);
        m["rank.freeze_encoder"] = ABLIST_FIELD(bool, finetune.freeze_encoder);
        m["rank.loss"] = {[](RunConfig& c, std::string_view v) {
                              if (v == "listmle") c.finetune.loss = ranker::RankLoss::listmle;
                              else if (v == "mse") c.finetune.loss = ranker::RankLoss::mse;
                              else throw util::ParseError("expected listmle or mse");
                          },
                          [](const RunConfig& c) {
                              return std::string(c.finetune.loss == ranker::RankLoss::listmle ? "listmle" : "mse");
                          }};
        m["rank.mixer"] = {[](RunConfig& c, std::string_view v) {
                               if (v == "isab") c.ranker.mixer = ranker::Mixer::isab;
                               else if (v == "mlp") c.ranker.mixer = ranker::Mixer::mlp;
                               else throw util::ParseError("expected isab or mlp");
                           },
                           [](const RunConfig& c) {
                               return std::string(c.ranker.mixer == ranker::Mixer::isab ? "isab" : "mlp");
                           }};
        m["rank.d_r"] = ABLIST_FIELD(std::size_t, ranker.d_r);
        m["rank.layers"] = ABLIST_FIELD(std::size_t, ranker.layers);
        m["rank.inducing"] = ABLIST_FIELD(std::size_t, ranker.inducing);
        m["rank.heads"] = ABLIST_FIELD(std::size_t, ranker.heads);
        m["rank.dropout"] = ABLIST_FIELD(double, ranker.dropout);

        m["eval.recall_top"] = ABLIST_FIELD(std::size_t, recall_top);
        return m;
    }();
    return t;
}

#undef ABLIST_FIELD

std::uint64_t fnv1a(std::string_view s, std::uint64_t h) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace

listsample::SamplerConfig RunConfig::train_sampler() const {
    auto s = listsample::SamplerConfig::for_regime(split.regime);
    s.delta_seq = delta_seq;
    s.k = list_k;
    if (y_cutoff) s.y_cutoff = *y_cutoff;
    if (homologous_ratio) s.homologous_ratio = *homologous_ratio;
    return s;
}

listsample::SamplerConfig RunConfig::test_sampler() const {
    auto s = train_sampler();
    s.homologous_ratio = 1.0;
    return s;
}

void RunConfig::validate() const {
    try {
        synth.validate();
        split.validate();
        train_sampler().validate();
        encoder.validate();
        pretrain.validate();
        auto r = ranker;
        r.d_in = encoder.embedding_width();
        r.validate();
        finetune.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (train_lists == 0 || test_lists == 0) throw ConfigError("sampler: list counts must be >= 1");
    if (recall_top == 0) throw ConfigError("eval: recall_top must be >= 1");
}

RunConfig preset(std::string_view name) {
    RunConfig c;
    if (name == "reference") {
        c.synth.families = 20;
        c.synth.antibodies_per_antigen = 25;
        c.encoder.d_hidden = 128;
        c.encoder.d_out = 64;
        c.ranker.d_r = 64;
        c.train_lists = 2000;
        c.test_lists = 500;
    } else if (name == "desk-small") {
        c.encoder.d_hidden = 32;
        c.encoder.d_out = 16;
        c.pretrain.epochs = 40;
        c.pretrain.warmup = 4;
        c.pretrain.lr = 3e-3;
        c.ranker.d_r = 32;
        c.finetune.epochs = 10;
        c.finetune.lr = 3e-3;
    } else {
        throw ConfigError("unknown preset '" + std::string(name) + "' (expected desk-small or reference)");
    }
    c.ranker.d_in = c.encoder.embedding_width();
    return c;
}

std::map<std::string, std::string> to_entries(const RunConfig& cfg) {
    std::map<std::string, std::string> out;
    for (const auto& [k, f] : table()) out.emplace(k, f.get(cfg));
    return out;
}

void set_entry(RunConfig& cfg, std::string_view key, std::string_view value) {
    const auto it = table().find(key);
    if (it == table().end()) throw ConfigError("unknown key '" + std::string(key) + "'");
    try {
        it->second.set(cfg, value);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string(key) + ": " + e.what());
    } catch (const util::ParseError& e) {
        throw ConfigError(std::string(key) + ": " + e.what());
    }
    cfg.ranker.d_in = cfg.encoder.embedding_width();
}

void apply_config_text(RunConfig& cfg, std::istream& in, std::string_view origin) {
    std::string line;
    std::string section;
    std::set<std::string> seen;
    for (std::size_t n = 1; std::getline(in, line); ++n) {
        const auto where = [&] { return std::string(origin) + ":" + std::to_string(n) + ": "; };
        const auto body = util::trim(std::string_view(line).substr(0, line.find_first_of("#;")));
        if (body.empty()) continue;
        if (body.front() == '[') {
            if (body.back() != ']' || body.size() < 3) throw ConfigError(where() + "malformed section header");
            section = std::string(util::trim(body.substr(1, body.size() - 2)));
            continue;
        }
        const auto eq = body.find('=');
        if (eq == std::string_view::npos) throw ConfigError(where() + "expected 'key = value'");
        if (section.empty()) throw ConfigError(where() + "key outside of any section");
        const std::string key = section + "." + std::string(util::trim(body.substr(0, eq)));
        if (!seen.insert(key).second) throw ConfigError(where() + "duplicate key '" + key + "'");
        try {
            set_entry(cfg, key, util::trim(body.substr(eq + 1)));
        } catch (const ConfigError& e) {
            throw ConfigError(where() + e.what());
        }
    }
}

void apply_env(RunConfig& cfg, char** env) {
    static constexpr std::string_view kPrefix = "ABLIST_";
    for (; env && *env; ++env) {
        const std::string_view var(*env);
        if (var.substr(0, kPrefix.size()) != kPrefix) continue;
        const auto eq = var.find('=');
        if (eq == std::string_view::npos) continue;
        std::string name(var.substr(kPrefix.size(), eq - kPrefix.size()));
        for (auto& ch : name) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
        const auto us = name.find('_');
        if (us == std::string::npos) throw ConfigError("environment: cannot map '" + std::string(var.substr(0, eq)) + "'");
        name[us] = '.';
        try {
            set_entry(cfg, name, var.substr(eq + 1));
        } catch (const ConfigError& e) {
            throw ConfigError("environment " + std::string(var.substr(0, eq)) + ": " + e.what());
        }
    }
}

std::uint64_t config_hash(const RunConfig& cfg, Stage stage) {
    std::vector<std::string_view> sections{"run.", "synth.", "split.", "encoder.", "pretrain."};
    if (stage == Stage::rank) {
        sections.push_back("sampler.");
        sections.push_back("rank.");
    }
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& [k, v] : to_entries(cfg)) {
        for (auto s : sections) {
            if (k.compare(0, s.size(), s) != 0) continue;
            h = fnv1a(k + "=" + v + "\n", h);
            break;
        }
    }
    return h;
}

std::string_view to_string(Stage s) { return s == Stage::pretrain ? "pretrain" : "rank"; }

} // namespace ablist::cli
