#include <doctest.h>

#include <ablist/metrics/metrics.hpp>

#include "support/metric_oracles.hpp"

#include <cmath>
#include <random>

using namespace ablist;
using metrics::ListView;

namespace {

// Labels -1..-5 so item 0 is the strongest; scores perfectly aligned.
const std::vector<double> kY{-5, -4, -3, -2, -1};
const std::vector<double> kPerfect{5, 4, 3, 2, 1};

struct RandomLists {
    std::vector<std::vector<double>> r, y;
    std::vector<ListView> views;
};

RandomLists random_lists(std::size_t n, std::size_t k, std::uint64_t seed, bool allow_ties) {
    RandomLists out;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    std::uniform_int_distribution<int> grid(0, 3);
    for (std::size_t l = 0; l < n; ++l) {
        std::vector<double> r(k), y(k);
        const bool coarse = allow_ties && l % 3 == 0;
        for (auto& v : r) v = coarse ? static_cast<double>(grid(rng)) : nd(rng);
        for (auto& v : y) v = nd(rng);
        out.r.push_back(std::move(r));
        out.y.push_back(std::move(y));
    }
    for (std::size_t l = 0; l < n; ++l) out.views.push_back({out.r[l], out.y[l]});
    return out;
}

} // namespace

TEST_CASE("kendall_tau examples") {
    CHECK(metrics::kendall_tau(kPerfect, kY) == 1.0);
    const std::vector<double> reversed{1, 2, 3, 4, 5};
    CHECK(metrics::kendall_tau(reversed, kY) == -1.0);
    const std::vector<double> swap{5, 4, 2, 3, 1};
    CHECK(metrics::kendall_tau(swap, kY) == doctest::Approx(0.8).epsilon(1e-15));
    const std::vector<double> one{1};
    CHECK_THROWS_AS(metrics::kendall_tau(one, one), std::invalid_argument);
}

TEST_CASE("list-level metric examples") {
    const std::vector<double> swap{5, 4, 2, 3, 1};
    const std::vector<double> tie{5, 4, 3, 3, 1};
    const std::vector<double> top_only{5, 1, 2, 3, 4};

    std::vector<ListView> perfect(10, ListView{kPerfect, kY});
    auto rep = metrics::evaluate(perfect);
    CHECK(rep.fra == 100.0);
    CHECK(rep.kendall_tau == 1.0);
    CHECK(rep.pra == 100.0);
    CHECK(rep.pau == 100.0);
    CHECK(rep.p_at_1 == 100.0);

    std::vector<ListView> mixed(10, ListView{swap, kY});
    for (int i = 0; i < 3; ++i) mixed[i] = {kPerfect, kY};
    CHECK(metrics::fra(mixed) == doctest::Approx(30.0).epsilon(1e-15));

    std::vector<ListView> swapped{{swap, kY}};
    CHECK(metrics::fra(swapped) == 0.0);
    CHECK(metrics::pra(swapped) == doctest::Approx(90.0).epsilon(1e-15));
    CHECK(metrics::pau(swapped) == doctest::Approx(90.0).epsilon(1e-15));

    std::vector<ListView> tied{{tie, kY}};
    CHECK(metrics::pau(tied) - metrics::pra(tied) == doctest::Approx(5.0).epsilon(1e-12));

    const std::vector<double> flat(5, 0.7);
    std::vector<ListView> constant{{flat, kY}};
    CHECK(metrics::pau(constant) == 50.0);

    std::vector<ListView> top{{top_only, kY}};
    CHECK(metrics::p_at_1(top) == 100.0);
    CHECK(metrics::fra(top) == 0.0);
}

TEST_CASE("metrics agree with brute-force oracles") {
    auto lists = random_lists(1000, 5, 17, true);
    auto rep = metrics::evaluate(lists.views);
    double fra = 0, tau = 0, pra = 0, pau = 0, p1 = 0;
    for (std::size_t l = 0; l < lists.views.size(); ++l) {
        const auto& r = lists.r[l];
        const auto& y = lists.y[l];
        const auto& rec = rep.lists[l];
        CHECK(rec.exact == testing::oracle_exact(r, y));
        CHECK(rec.tau == testing::oracle_tau(r, y));
        CHECK(static_cast<double>(rec.concordant) / static_cast<double>(rec.pairs) == testing::oracle_pra(r, y));
        CHECK(rec.pair_credit / static_cast<double>(rec.pairs) == testing::oracle_pau(r, y));
        CHECK(rec.top1 == testing::oracle_top1(r, y));
        fra += testing::oracle_exact(r, y);
        tau += testing::oracle_tau(r, y);
        pra += testing::oracle_pra(r, y);
        pau += testing::oracle_pau(r, y);
        p1 += testing::oracle_top1(r, y);
    }
    CHECK(rep.fra == 100.0 * fra / 1000.0);
    CHECK(rep.kendall_tau == tau / 1000.0);
    CHECK(rep.pra == 100.0 * pra / 1000.0);
    CHECK(rep.pau == 100.0 * pau / 1000.0);
    CHECK(rep.p_at_1 == 100.0 * p1 / 1000.0);
}

TEST_CASE("uniform random scorer baselines") {
    auto lists = random_lists(10000, 5, 99, false);
    auto rep = metrics::evaluate(lists.views);
    CHECK(std::abs(rep.p_at_1 - 20.0) <= 1.5);
    CHECK(std::abs(rep.pra - 50.0) <= 2.0);
    CHECK(rep.pau == rep.pra);
}

TEST_CASE("metrics depend only on score order") {
    auto lists = random_lists(200, 5, 3, true);
    std::vector<std::vector<double>> transformed;
    for (const auto& r : lists.r) {
        std::vector<double> t;
        for (double v : r) t.push_back(std::exp(0.5 * v) - 7.0);
        transformed.push_back(std::move(t));
    }
    std::vector<ListView> tv;
    for (std::size_t l = 0; l < lists.r.size(); ++l) tv.push_back({transformed[l], lists.y[l]});
    auto a = metrics::evaluate(lists.views);
    auto b = metrics::evaluate(tv);
    CHECK(a.fra == b.fra);
    CHECK(a.kendall_tau == b.kendall_tau);
    CHECK(a.pra == b.pra);
    CHECK(a.pau == b.pau);
    CHECK(a.p_at_1 == b.p_at_1);
}

TEST_CASE("full-rank accuracy implies the other metrics") {
    auto lists = random_lists(50, 5, 8, false);
    for (std::size_t l = 0; l < lists.r.size(); ++l) {
        lists.r[l] = lists.y[l];
        for (auto& v : lists.r[l]) v = -v;
    }
    auto rep = metrics::evaluate(lists.views);
    CHECK(rep.fra == 100.0);
    CHECK(rep.kendall_tau == 1.0);
    CHECK(rep.pra == 100.0);
    CHECK(rep.pau == 100.0);
    CHECK(rep.p_at_1 == 100.0);
}

TEST_CASE("screening curves") {
    std::vector<double> s(20);
    for (std::size_t i = 0; i < 20; ++i) s[i] = static_cast<double>(20 - i);   // candidate 0 strongest
    std::vector<std::size_t> oracle(20), worst(20);
    for (std::size_t i = 0; i < 20; ++i) {
        oracle[i] = i;
        worst[i] = 19 - i;
    }
    auto c = metrics::screening_curves(oracle, s, 3);
    CHECK(c.hit_rate[0] == 1.0);
    CHECK(c.recall[2] == 1.0);
    CHECK(c.recall[0] == doctest::Approx(1.0 / 3.0));

    auto w = metrics::screening_curves(worst, s, 3);
    CHECK(w.hit_rate[18] == 0.0);
    CHECK(w.hit_rate[19] == 1.0);

    // Average recall over random orders approaches n/20.
    std::mt19937_64 rng(12);
    std::vector<double> mean(20, 0.0);
    const int trials = 20000;
    for (int t = 0; t < trials; ++t) {
        auto order = oracle;
        std::shuffle(order.begin(), order.end(), rng);
        auto rc = metrics::screening_curves(order, s, 3);
        for (std::size_t n = 0; n < 20; ++n) {
            mean[n] += rc.recall[n] / trials;
            if (n > 0) CHECK(rc.recall[n] >= rc.recall[n - 1]);
        }
    }
    for (std::size_t n = 0; n < 20; ++n) CHECK(std::abs(mean[n] - static_cast<double>(n + 1) / 20.0) < 0.01);

    CHECK_THROWS_AS(metrics::screening_curves(oracle, s, 21), std::invalid_argument);
    CHECK_THROWS_AS(metrics::screening_curves(oracle, s, 0), std::invalid_argument);
    std::vector<std::size_t> dup(20, 0);
    CHECK_THROWS_AS(metrics::screening_curves(dup, s, 3), std::invalid_argument);
}
