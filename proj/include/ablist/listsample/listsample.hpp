#pragma once

#include <ablist/graph/pair.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ablist::listsample {

/// 1 - levenshtein(a, b) / max(|a|, |b|). Throws on an empty sequence.
double seq_similarity(std::string_view a, std::string_view b);

enum class ListKind { homologous, heterogeneous };
enum class Regime { random, ag, ab };

std::string_view to_string(ListKind k);
std::string_view to_string(Regime r);
ListKind parse_list_kind(std::string_view s);
Regime parse_regime(std::string_view s);

struct SamplerConfig {
    double delta_seq = 0.9;
    double y_cutoff = 0.5;
    std::size_t k = 5;
    double homologous_ratio = 0.5;   // share of homologous lists; 1 = homologous only
    Regime regime = Regime::random;

    /// Regime defaults: random/ag mix 1:1 at margin 0.5, ab is homologous
    /// only at margin 1.0.
    static SamplerConfig for_regime(Regime r);
    void validate() const;
};

struct RankingList {
    std::uint64_t list_id = 0;
    std::vector<std::uint32_t> pairs;   // K distinct pair ids
    std::vector<double> labels;         // log-Kd per member
    std::uint32_t seed = 0;             // seed pair id (first drawn member for heterogeneous lists)
    ListKind kind = ListKind::homologous;
};

/// One labeled pair as seen by the sampler.
struct Item {
    std::uint32_t pair_id = 0;
    double y = 0.0;
    std::uint32_t family = 0;
    std::string antigen;
};

/// Labeled items plus their antigen similarity, computed once per distinct
/// antigen sequence.
class SampleContext {
public:
    explicit SampleContext(std::vector<Item> items);
    /// Items from the labeled members of `pairs` restricted to `subset`.
    static SampleContext from_pairs(std::span<const graph::AbAgPair> pairs, std::span<const std::uint32_t> subset);

    const std::vector<Item>& items() const { return items_; }
    std::size_t size() const { return items_.size(); }
    double similarity(std::size_t i, std::size_t j) const {
        return sim_[antigen_of_[i] * n_antigens_ + antigen_of_[j]];
    }

private:
    std::vector<Item> items_;
    std::vector<std::size_t> antigen_of_;
    std::size_t n_antigens_ = 0;
    std::vector<double> sim_;
};

/// Item indices i != seed with Sim(Ag_i, Ag_seed) >= delta_seq and
/// |y_seed - y_i| > y_cutoff.
std::vector<std::size_t> candidate_pool(const SampleContext& ctx, std::size_t seed, const SamplerConfig& cfg);

struct SampleResult {
    std::optional<RankingList> list;
    std::string rejection;
};

/// Seed plus K-1 members drawn uniformly without replacement from `pool`, in
/// random order. Rejected when the pool is too small.
SampleResult sample_list(const SampleContext& ctx, std::size_t seed, std::span<const std::size_t> pool,
                         std::size_t k, std::mt19937_64& rng);

/// K members from K distinct antigen families, margin not enforced.
SampleResult sample_heterogeneous(const SampleContext& ctx, std::size_t k, std::mt19937_64& rng);

/// `n_lists` lists following the regime mix. Homologous seeds are drawn
/// uniformly from items whose pool can fill a list. Throws
/// std::runtime_error when no valid list can be built.
std::vector<RankingList> sample_epoch(const SampleContext& ctx, const SamplerConfig& cfg, std::size_t n_lists,
                                      std::mt19937_64& rng);

/// Re-checks the homology and margin predicate for every non-seed member.
bool satisfies_constraints(const SampleContext& ctx, const RankingList& list, const SamplerConfig& cfg);

struct Split {
    std::vector<std::uint32_t> train;
    std::vector<std::uint32_t> test;
};

struct SplitConfig {
    Regime regime = Regime::random;
    std::size_t folds = 5;
    std::size_t fold = 0;
    std::size_t clusters = 5;
    double test_share = 0.7;   // of each selected cluster's samples
    std::uint64_t seed = 0;
    void validate() const;
};

/// random: `folds`-way partition, fold `fold` is the test set. ag: k-means
/// over antigen 3-mer profiles; 70% of the samples of the cluster farthest
/// from the others go to test. ab: the same on antibody CDRs with the two
/// farthest clusters. Index lists are sorted.
Split make_splits(std::span<const graph::AbAgPair> pairs, const SplitConfig& cfg);

/// Normalized 3-mer count vector (length 20^3).
std::vector<double> kmer_profile(std::string_view seq);

// `list_id kind pair_ids y` with comma-separated members; see docs/formats.md.
// The seed is not stored; read_lists sets it to the first member.
void write_lists(std::ostream& out, std::span<const RankingList> lists);
std::vector<RankingList> read_lists(std::istream& in);

} // namespace ablist::listsample
