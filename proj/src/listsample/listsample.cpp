#include <ablist/listsample/listsample.hpp>

#include <ablist/cluster/kmeans.hpp>
#include <ablist/graph/features.hpp>
#include <ablist/util/text.hpp>

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace ablist::listsample {

double seq_similarity(std::string_view a, std::string_view b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("seq_similarity: empty sequence");
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    std::iota(prev.begin(), prev.end(), std::size_t{0});
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return 1.0 - static_cast<double>(prev[b.size()]) / static_cast<double>(std::max(a.size(), b.size()));
}

std::string_view to_string(ListKind k) { return k == ListKind::homologous ? "homologous" : "heterogeneous"; }

std::string_view to_string(Regime r) {
    switch (r) {
    case Regime::random: return "random";
    case Regime::ag: return "ag";
    case Regime::ab: return "ab";
    }
    return "?";
}

ListKind parse_list_kind(std::string_view s) {
    if (s == "homologous") return ListKind::homologous;
    if (s == "heterogeneous") return ListKind::heterogeneous;
    throw std::invalid_argument("unknown list kind '" + std::string(s) + "'");
}

Regime parse_regime(std::string_view s) {
    if (s == "random") return Regime::random;
    if (s == "ag") return Regime::ag;
    if (s == "ab") return Regime::ab;
    throw std::invalid_argument("unknown split regime '" + std::string(s) + "' (expected random, ag or ab)");
}

SamplerConfig SamplerConfig::for_regime(Regime r) {
    SamplerConfig c;
    c.regime = r;
    if (r == Regime::ab) {
        c.y_cutoff = 1.0;
        c.homologous_ratio = 1.0;
    }
    return c;
}

void SamplerConfig::validate() const {
    if (!(delta_seq >= 0.0 && delta_seq <= 1.0)) throw std::invalid_argument("sampler: delta_seq must be in [0, 1]");
    if (!(y_cutoff >= 0.0)) throw std::invalid_argument("sampler: y_cutoff must be >= 0");
    if (k < 2) throw std::invalid_argument("sampler: K must be >= 2");
    if (!(homologous_ratio >= 0.0 && homologous_ratio <= 1.0)) {
        throw std::invalid_argument("sampler: homologous_ratio must be in [0, 1]");
    }
}

SampleContext::SampleContext(std::vector<Item> items) : items_(std::move(items)) {
    std::map<std::string, std::size_t> index;
    std::vector<const std::string*> unique;
    for (const auto& it : items_) {
        auto [pos, inserted] = index.try_emplace(it.antigen, unique.size());
        if (inserted) unique.push_back(&pos->first);
        antigen_of_.push_back(pos->second);
    }
    n_antigens_ = unique.size();
    sim_.assign(n_antigens_ * n_antigens_, 1.0);
    for (std::size_t a = 0; a < n_antigens_; ++a) {
        for (std::size_t b = a + 1; b < n_antigens_; ++b) {
            const double s = seq_similarity(*unique[a], *unique[b]);
            sim_[a * n_antigens_ + b] = s;
            sim_[b * n_antigens_ + a] = s;
        }
    }
}

SampleContext SampleContext::from_pairs(std::span<const graph::AbAgPair> pairs, std::span<const std::uint32_t> subset) {
    std::vector<Item> items;
    for (auto id : subset) {
        const auto& p = pairs[id];
        if (p.affinity) items.push_back({p.id, *p.affinity, p.family, p.ag.sequence});
    }
    return SampleContext(std::move(items));
}

std::vector<std::size_t> candidate_pool(const SampleContext& ctx, std::size_t seed, const SamplerConfig& cfg) {
    if (seed >= ctx.size()) throw std::out_of_range("candidate_pool: seed index out of range");
    const double ys = ctx.items()[seed].y;
    std::vector<std::size_t> pool;
    for (std::size_t i = 0; i < ctx.size(); ++i) {
        if (i == seed) continue;
        if (ctx.similarity(seed, i) >= cfg.delta_seq && std::abs(ys - ctx.items()[i].y) > cfg.y_cutoff) pool.push_back(i);
    }
    return pool;
}

namespace {

RankingList make_list(const SampleContext& ctx, std::vector<std::size_t> members, std::size_t seed, ListKind kind,
                      std::mt19937_64& rng) {
    std::shuffle(members.begin(), members.end(), rng);
    RankingList l;
    l.kind = kind;
    l.seed = ctx.items()[seed].pair_id;
    for (auto m : members) {
        l.pairs.push_back(ctx.items()[m].pair_id);
        l.labels.push_back(ctx.items()[m].y);
    }
    return l;
}

} // namespace

SampleResult sample_list(const SampleContext& ctx, std::size_t seed, std::span<const std::size_t> pool, std::size_t k,
                         std::mt19937_64& rng) {
    if (k < 2) throw std::invalid_argument("sample_list: K must be >= 2");
    if (pool.size() < k - 1) {
        return {std::nullopt, "pool has " + std::to_string(pool.size()) + " candidates, need " + std::to_string(k - 1)};
    }
    std::vector<std::size_t> draw(pool.begin(), pool.end());
    for (std::size_t i = 0; i + 1 < k; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, draw.size() - 1);
        std::swap(draw[i], draw[pick(rng)]);
    }
    std::vector<std::size_t> members{seed};
    members.insert(members.end(), draw.begin(), draw.begin() + static_cast<std::ptrdiff_t>(k - 1));
    return {make_list(ctx, std::move(members), seed, ListKind::homologous, rng), {}};
}

SampleResult sample_heterogeneous(const SampleContext& ctx, std::size_t k, std::mt19937_64& rng) {
    std::map<std::uint32_t, std::vector<std::size_t>> by_family;
    for (std::size_t i = 0; i < ctx.size(); ++i) by_family[ctx.items()[i].family].push_back(i);
    if (by_family.size() < k) {
        return {std::nullopt, "only " + std::to_string(by_family.size()) + " antigen families, need " + std::to_string(k)};
    }
    std::vector<const std::vector<std::size_t>*> families;
    for (const auto& [f, members] : by_family) families.push_back(&members);
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < k; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, families.size() - 1);
        std::swap(families[i], families[pick(rng)]);
        std::uniform_int_distribution<std::size_t> within(0, families[i]->size() - 1);
        members.push_back((*families[i])[within(rng)]);
    }
    const std::size_t seed = members.front();
    return {make_list(ctx, std::move(members), seed, ListKind::heterogeneous, rng), {}};
}

std::vector<RankingList> sample_epoch(const SampleContext& ctx, const SamplerConfig& cfg, std::size_t n_lists,
                                      std::mt19937_64& rng) {
    cfg.validate();
    std::vector<std::size_t> viable;
    std::vector<std::vector<std::size_t>> pools(ctx.size());
    for (std::size_t i = 0; i < ctx.size(); ++i) {
        pools[i] = candidate_pool(ctx, i, cfg);
        if (pools[i].size() + 1 >= cfg.k) viable.push_back(i);
    }

    std::bernoulli_distribution homologous(cfg.homologous_ratio);
    std::vector<RankingList> out;
    out.reserve(n_lists);
    for (std::size_t n = 0; n < n_lists; ++n) {
        SampleResult r;
        if (homologous(rng)) {
            if (viable.empty()) {
                throw std::runtime_error("insufficient data for sampling: no seed has " + std::to_string(cfg.k - 1) +
                                         " homologous candidates among " + std::to_string(ctx.size()) + " labeled pairs");
            }
            std::uniform_int_distribution<std::size_t> pick(0, viable.size() - 1);
            const std::size_t seed = viable[pick(rng)];
            r = sample_list(ctx, seed, pools[seed], cfg.k, rng);
        } else {
            r = sample_heterogeneous(ctx, cfg.k, rng);
            if (!r.list) throw std::runtime_error("insufficient data for sampling: " + r.rejection);
        }
        r.list->list_id = n;
        out.push_back(std::move(*r.list));
    }
    return out;
}

bool satisfies_constraints(const SampleContext& ctx, const RankingList& list, const SamplerConfig& cfg) {
    std::map<std::uint32_t, std::size_t> where;
    for (std::size_t i = 0; i < ctx.size(); ++i) where[ctx.items()[i].pair_id] = i;
    const auto seed_it = where.find(list.seed);
    if (seed_it == where.end()) return false;
    const std::size_t seed = seed_it->second;
    std::vector<std::uint32_t> sorted = list.pairs;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) return false;
    bool seed_seen = false;
    for (auto id : list.pairs) {
        const auto it = where.find(id);
        if (it == where.end()) return false;
        if (it->second == seed) {
            seed_seen = true;
            continue;
        }
        if (ctx.similarity(seed, it->second) < cfg.delta_seq) return false;
        if (!(std::abs(ctx.items()[seed].y - ctx.items()[it->second].y) > cfg.y_cutoff)) return false;
    }
    return seed_seen;
}

void SplitConfig::validate() const {
    if (folds < 2 || fold >= folds) throw std::invalid_argument("split: need folds >= 2 and fold < folds");
    if (clusters < 2) throw std::invalid_argument("split: clusters must be >= 2");
    if (!(test_share > 0.0 && test_share <= 1.0)) throw std::invalid_argument("split: test_share must be in (0, 1]");
}

std::vector<double> kmer_profile(std::string_view seq) {
    constexpr std::size_t n = graph::kAminoAcids.size();
    std::vector<double> p(n * n * n, 0.0);
    if (seq.size() < 3) return p;
    const double w = 1.0 / static_cast<double>(seq.size() - 2);
    for (std::size_t i = 0; i + 2 < seq.size(); ++i) {
        p[(graph::amino_index(seq[i]) * n + graph::amino_index(seq[i + 1])) * n + graph::amino_index(seq[i + 2])] += w;
    }
    return p;
}

Split make_splits(std::span<const graph::AbAgPair> pairs, const SplitConfig& cfg) {
    cfg.validate();
    const std::size_t n = pairs.size();
    std::mt19937_64 rng(cfg.seed);
    Split s;

    if (cfg.regime == Regime::random) {
        std::vector<std::uint32_t> order(n);
        std::iota(order.begin(), order.end(), 0u);
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t p = 0; p < n; ++p) (p % cfg.folds == cfg.fold ? s.test : s.train).push_back(order[p]);
    } else {
        const bool by_antigen = cfg.regime == Regime::ag;
        std::map<std::string, std::size_t> index;
        std::vector<std::string> unique;
        std::vector<std::size_t> seq_of(n);
        for (std::size_t i = 0; i < n; ++i) {
            const auto& seq = by_antigen ? pairs[i].ag.sequence : pairs[i].ab.sequence;
            auto [pos, inserted] = index.try_emplace(seq, unique.size());
            if (inserted) unique.push_back(seq);
            seq_of[i] = pos->second;
        }
        if (unique.size() < cfg.clusters) {
            throw std::invalid_argument("split: " + std::to_string(unique.size()) + " distinct sequences, fewer than " +
                                        std::to_string(cfg.clusters) + " clusters");
        }
        const std::size_t width = graph::kAminoAcids.size() * graph::kAminoAcids.size() * graph::kAminoAcids.size();
        diff::Tensor profiles(unique.size(), width);
        for (std::size_t u = 0; u < unique.size(); ++u) {
            const auto p = kmer_profile(unique[u]);
            std::copy(p.begin(), p.end(), profiles.data().begin() + static_cast<std::ptrdiff_t>(u * width));
        }
        const auto km = cluster::kmeans(profiles, cfg.clusters, cfg.seed);

        // Remoteness of a cluster = mean centroid distance to the others.
        std::vector<std::pair<double, std::size_t>> remote;
        for (std::size_t a = 0; a < cfg.clusters; ++a) {
            double total = 0.0;
            for (std::size_t b = 0; b < cfg.clusters; ++b) {
                double d2 = 0.0;
                for (std::size_t j = 0; j < width; ++j) {
                    const double d = km.centroids(a, j) - km.centroids(b, j);
                    d2 += d * d;
                }
                total += std::sqrt(d2);
            }
            remote.push_back({-total, a});
        }
        std::sort(remote.begin(), remote.end());
        const std::size_t n_selected = by_antigen ? 1 : 2;
        std::vector<bool> selected(cfg.clusters, false);
        for (std::size_t i = 0; i < n_selected; ++i) selected[remote[i].second] = true;

        for (std::size_t c = 0; c < cfg.clusters; ++c) {
            std::vector<std::uint32_t> members;
            for (std::size_t i = 0; i < n; ++i)
                if (km.assignment[seq_of[i]] == c) members.push_back(static_cast<std::uint32_t>(i));
            if (!selected[c]) {
                s.train.insert(s.train.end(), members.begin(), members.end());
                continue;
            }
            std::shuffle(members.begin(), members.end(), rng);
            const auto n_test = static_cast<std::size_t>(std::llround(cfg.test_share * static_cast<double>(members.size())));
            s.test.insert(s.test.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(n_test));
            s.train.insert(s.train.end(), members.begin() + static_cast<std::ptrdiff_t>(n_test), members.end());
        }
    }
    std::sort(s.train.begin(), s.train.end());
    std::sort(s.test.begin(), s.test.end());
    return s;
}

void write_lists(std::ostream& out, std::span<const RankingList> lists) {
    out << "# list_id\tkind\tpair_ids\ty\n";
    for (const auto& l : lists) {
        out << l.list_id << '\t' << to_string(l.kind) << '\t'
            << util::join(l.pairs, ',', [](std::uint32_t v) { return std::to_string(v); }) << '\t'
            << util::join(l.labels, ',', [](double v) { return util::format_double(v); }) << '\n';
    }
}

std::vector<RankingList> read_lists(std::istream& in) {
    std::vector<RankingList> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        try {
            const auto f = util::split(line, '\t');
            if (f.size() != 4) throw util::ParseError("expected 4 fields");
            RankingList l;
            l.list_id = util::parse_int<std::uint64_t>(f[0]);
            l.kind = parse_list_kind(f[1]);
            for (auto v : util::split(f[2], ',')) l.pairs.push_back(util::parse_int<std::uint32_t>(v));
            for (auto v : util::split(f[3], ',')) l.labels.push_back(util::parse_double(v));
            if (l.pairs.size() != l.labels.size() || l.pairs.size() < 2) {
                throw util::ParseError("member and label counts differ or K < 2");
            }
            l.seed = l.pairs.front();
            out.push_back(std::move(l));
        } catch (const std::exception& e) {
            throw util::ParseError("list line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

} // namespace ablist::listsample
