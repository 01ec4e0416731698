#include <doctest.h>

#include <ablist/listsample/listsample.hpp>
#include <ablist/synth/synth.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

using namespace ablist;
using namespace ablist::listsample;

namespace {

synth::Generated desk_data(std::uint64_t seed, double labeled = 1.0) {
    synth::SynthConfig c;
    c.families = 6;
    c.antigens_per_family = 3;
    c.antibodies_per_antigen = 8;
    c.ag_len_min = 40;
    c.ag_len_max = 60;
    c.labeled_fraction = labeled;
    c.seed = seed;
    return synth::gen_dataset(c);
}

std::vector<std::uint32_t> all_ids(std::size_t n) {
    std::vector<std::uint32_t> v(n);
    for (std::uint32_t i = 0; i < n; ++i) v[i] = i;
    return v;
}

} // namespace

TEST_CASE("seq_similarity examples") {
    CHECK(seq_similarity("ACDE", "ACDE") == 1.0);
    CHECK(seq_similarity("AAAA", "AAAT") == 0.75);
    CHECK(seq_similarity("AAAA", "CCCC") == 0.0);
    CHECK(seq_similarity("AC", "ACDE") == 0.5);
    CHECK(seq_similarity("KITTEN", "SITTING") == doctest::Approx(1.0 - 3.0 / 7.0));
    CHECK(seq_similarity("SITTING", "KITTEN") == seq_similarity("KITTEN", "SITTING"));
    CHECK_THROWS_AS(seq_similarity("", "A"), std::invalid_argument);
}

TEST_CASE("within-family antigen similarity at mutation rate 0.02") {
    synth::SynthConfig c;
    c.families = 20;
    c.antigens_per_family = 4;
    c.antibodies_per_antigen = 1;
    c.ag_len_min = c.ag_len_max = 100;
    c.seed = 4;
    auto g = synth::gen_dataset(c);
    std::size_t ok = 0, total = 0;
    for (const auto& a : g.dataset.pairs)
        for (const auto& b : g.dataset.pairs)
            if (a.id < b.id && a.family == b.family) {
                ++total;
                ok += seq_similarity(a.ag.sequence, b.ag.sequence) >= 0.9 ? 1 : 0;
            }
    CHECK(static_cast<double>(ok) >= 0.95 * static_cast<double>(total));
}

TEST_CASE("candidate_pool matches a brute-force filter") {
    auto g = desk_data(1);
    auto ctx = SampleContext::from_pairs(g.dataset.pairs, all_ids(g.dataset.pairs.size()));
    for (double delta : {0.0, 0.5, 0.9, 1.0}) {
        for (double cut : {0.0, 0.5, 1.0}) {
            SamplerConfig cfg;
            cfg.delta_seq = delta;
            cfg.y_cutoff = cut;
            for (std::size_t s = 0; s < ctx.size(); s += 7) {
                std::vector<std::size_t> expect;
                const auto& seed = g.dataset.pairs[ctx.items()[s].pair_id];
                for (std::size_t i = 0; i < ctx.size(); ++i) {
                    const auto& p = g.dataset.pairs[ctx.items()[i].pair_id];
                    if (i != s && seq_similarity(p.ag.sequence, seed.ag.sequence) >= delta &&
                        std::abs(*p.affinity - *seed.affinity) > cut) {
                        expect.push_back(i);
                    }
                }
                CHECK(candidate_pool(ctx, s, cfg) == expect);
            }
        }
    }
    SamplerConfig loose;
    loose.delta_seq = 0.0;
    loose.y_cutoff = 0.0;
    auto pool = candidate_pool(ctx, 0, loose);
    for (auto i : pool) CHECK(ctx.items()[i].y != ctx.items()[0].y);
    SamplerConfig exact;
    exact.delta_seq = 1.0;
    exact.y_cutoff = 0.0;
    for (auto i : candidate_pool(ctx, 0, exact)) CHECK(ctx.items()[i].antigen == ctx.items()[0].antigen);
}

TEST_CASE("sample_list membership") {
    std::vector<Item> items;
    for (std::uint32_t i = 0; i < 9; ++i) items.push_back({i, -5.0 - i, 0, "ACDEFG"});
    SampleContext ctx(items);
    std::mt19937_64 rng(5);

    std::vector<std::size_t> exact_pool{3, 5, 7, 8};
    auto r = sample_list(ctx, 0, exact_pool, 5, rng);
    REQUIRE(r.list);
    auto members = r.list->pairs;
    std::sort(members.begin(), members.end());
    CHECK(members == std::vector<std::uint32_t>{0, 3, 5, 7, 8});
    CHECK(r.list->seed == 0);

    auto empty = sample_list(ctx, 0, {}, 5, rng);
    CHECK(!empty.list);
    CHECK(!empty.rejection.empty());

    std::vector<std::size_t> pool8{1, 2, 3, 4, 5, 6, 7, 8};
    std::map<std::uint32_t, int> freq;
    const int draws = 10000;
    for (int d = 0; d < draws; ++d) {
        auto l = sample_list(ctx, 0, pool8, 5, rng).list;
        std::set<std::uint32_t> uniq(l->pairs.begin(), l->pairs.end());
        CHECK(uniq.size() == 5);
        for (auto p : l->pairs)
            if (p != 0) ++freq[p];
    }
    for (std::uint32_t p = 1; p <= 8; ++p) CHECK(std::abs(freq[p] / static_cast<double>(draws) - 0.5) <= 0.02);
}

TEST_CASE("sample_epoch regimes") {
    auto g = desk_data(2);
    auto ctx = SampleContext::from_pairs(g.dataset.pairs, all_ids(g.dataset.pairs.size()));
    std::mt19937_64 rng(6);

    auto ab = SamplerConfig::for_regime(Regime::ab);
    CHECK(ab.y_cutoff == 1.0);
    auto ab_lists = sample_epoch(ctx, ab, 300, rng);
    for (const auto& l : ab_lists) {
        CHECK(l.kind == ListKind::homologous);
        CHECK(satisfies_constraints(ctx, l, ab));
    }

    auto rnd = SamplerConfig::for_regime(Regime::random);
    auto lists = sample_epoch(ctx, rnd, 1000, rng);
    std::size_t homologous = 0;
    for (const auto& l : lists) {
        CHECK(l.pairs.size() == 5);
        if (l.kind == ListKind::homologous) {
            ++homologous;
            CHECK(satisfies_constraints(ctx, l, rnd));
        } else {
            std::set<std::uint32_t> fam;
            for (auto p : l.pairs) fam.insert(g.dataset.pairs[p].family);
            CHECK(fam.size() == 5);
        }
    }
    CHECK(std::abs(homologous / 1000.0 - 0.5) <= 0.03);

    std::mt19937_64 a(9), b(9);
    auto l1 = sample_epoch(ctx, rnd, 50, a);
    auto l2 = sample_epoch(ctx, rnd, 50, b);
    for (std::size_t i = 0; i < 50; ++i) CHECK(l1[i].pairs == l2[i].pairs);
}

TEST_CASE("sample_epoch reports insufficient data") {
    std::vector<Item> items{{0, -5, 0, "ACDEF"}, {1, -7, 0, "ACDEF"}};
    SampleContext ctx(items);
    std::mt19937_64 rng(1);
    auto cfg = SamplerConfig::for_regime(Regime::ab);
    CHECK_THROWS_AS(sample_epoch(ctx, cfg, 3, rng), std::runtime_error);
    cfg.k = 1;
    CHECK_THROWS_AS(sample_epoch(ctx, cfg, 3, rng), std::invalid_argument);
}

TEST_CASE("random split partitions the index set") {
    auto g = desk_data(3);
    const auto n = g.dataset.pairs.size();
    std::vector<int> seen(n, 0);
    for (std::size_t f = 0; f < 5; ++f) {
        SplitConfig cfg;
        cfg.fold = f;
        cfg.seed = 11;
        auto s = make_splits(g.dataset.pairs, cfg);
        CHECK(s.train.size() + s.test.size() == n);
        for (auto i : s.test) ++seen[i];
        std::vector<std::uint32_t> both;
        std::set_intersection(s.train.begin(), s.train.end(), s.test.begin(), s.test.end(), std::back_inserter(both));
        CHECK(both.empty());
    }
    for (int c : seen) CHECK(c == 1);
    SplitConfig cfg;
    cfg.seed = 11;
    CHECK(make_splits(g.dataset.pairs, cfg).test == make_splits(g.dataset.pairs, cfg).test);
}

TEST_CASE("ag split sends 70% of one antigen cluster to test") {
    auto g = desk_data(4);
    SplitConfig cfg;
    cfg.regime = Regime::ag;
    cfg.clusters = 4;
    cfg.seed = 2;
    auto s = make_splits(g.dataset.pairs, cfg);
    CHECK(s.train.size() + s.test.size() == g.dataset.pairs.size());
    std::vector<std::uint32_t> both;
    std::set_intersection(s.train.begin(), s.train.end(), s.test.begin(), s.test.end(), std::back_inserter(both));
    CHECK(both.empty());
    REQUIRE(!s.test.empty());

    // Counting oracle: the selected cluster is the set of antigens that have
    // any sample in test; 70% of its samples (rounded) must be in test.
    std::set<std::string> test_antigens;
    for (auto i : s.test) test_antigens.insert(g.dataset.pairs[i].ag.sequence);
    std::size_t cluster_size = 0;
    for (const auto& p : g.dataset.pairs) cluster_size += test_antigens.count(p.ag.sequence);
    CHECK(std::abs(static_cast<double>(s.test.size()) - 0.7 * static_cast<double>(cluster_size)) <= 1.0);
}

TEST_CASE("ab split isolates an outlier antibody family") {
    auto g = desk_data(5);
    // Family 0 antibodies rewritten with a composition no other family uses.
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> pick(0, 1);
    const char outlier[] = {'W', 'C'};
    for (auto& p : g.dataset.pairs)
        if (p.family == 0)
            for (auto& c : p.ab.sequence) c = outlier[pick(rng)];
    SplitConfig cfg;
    cfg.regime = Regime::ab;
    cfg.clusters = 4;
    auto s = make_splits(g.dataset.pairs, cfg);
    std::size_t outlier_in_test = 0, outlier_total = 0;
    for (const auto& p : g.dataset.pairs) outlier_total += p.family == 0;
    for (auto i : s.test) outlier_in_test += g.dataset.pairs[i].family == 0;
    CHECK(outlier_in_test * 2 > outlier_total);

    cfg.clusters = 1000;
    CHECK_THROWS_AS(make_splits(g.dataset.pairs, cfg), std::invalid_argument);
}

TEST_CASE("lists round-trip through text") {
    auto g = desk_data(6);
    auto ctx = SampleContext::from_pairs(g.dataset.pairs, all_ids(g.dataset.pairs.size()));
    std::mt19937_64 rng(1);
    auto lists = sample_epoch(ctx, SamplerConfig{}, 20, rng);
    std::stringstream ss;
    write_lists(ss, lists);
    auto back = read_lists(ss);
    REQUIRE(back.size() == lists.size());
    for (std::size_t i = 0; i < lists.size(); ++i) {
        CHECK(back[i].list_id == lists[i].list_id);
        CHECK(back[i].kind == lists[i].kind);
        CHECK(back[i].pairs == lists[i].pairs);
        CHECK(back[i].labels == lists[i].labels);
    }
}
