#include <ablist/metrics/metrics.hpp>

#include <ablist/util/text.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace ablist::metrics {

std::vector<std::size_t> predicted_permutation(std::span<const double> scores) {
    std::vector<std::size_t> p(scores.size());
    std::iota(p.begin(), p.end(), std::size_t{0});
    std::stable_sort(p.begin(), p.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    return p;
}

std::vector<std::size_t> true_permutation(std::span<const double> labels) {
    std::vector<std::size_t> p(labels.size());
    std::iota(p.begin(), p.end(), std::size_t{0});
    std::stable_sort(p.begin(), p.end(), [&](std::size_t a, std::size_t b) { return labels[a] < labels[b]; });
    return p;
}

ListRecord evaluate_list(ListView list) {
    const auto& r = list.scores;
    const auto& y = list.labels;
    if (r.size() != y.size()) throw std::invalid_argument("metrics: scores and labels differ in length");
    if (r.size() < 2) throw std::invalid_argument("metrics: lists need K >= 2");
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (!std::isfinite(r[i]) || !std::isfinite(y[i])) throw std::invalid_argument("metrics: non-finite input");
    }

    ListRecord rec;
    const std::size_t k = r.size();
    for (std::size_t u = 0; u < k; ++u) {
        for (std::size_t v = u + 1; v < k; ++v) {
            if (y[u] == y[v]) continue;
            ++rec.pairs;
            // Orient so that `hi` is the truly stronger item.
            const std::size_t hi = y[u] < y[v] ? u : v;
            const std::size_t lo = hi == u ? v : u;
            if (r[hi] > r[lo]) {
                ++rec.concordant;
                rec.pair_credit += 1.0;
            } else if (r[hi] < r[lo]) {
                ++rec.discordant;
            } else {
                rec.pair_credit += 0.5;
            }
        }
    }
    if (rec.pairs == 0) throw std::invalid_argument("metrics: all labels tied");
    rec.tau = (static_cast<double>(rec.concordant) - static_cast<double>(rec.discordant)) /
              (static_cast<double>(k * (k - 1)) / 2.0);
    const auto pred = predicted_permutation(r);
    const auto truth = true_permutation(y);
    rec.exact = pred == truth;
    rec.top1 = pred.front() == truth.front();
    return rec;
}

double kendall_tau(std::span<const double> scores, std::span<const double> labels) {
    return evaluate_list({scores, labels}).tau;
}

EvalReport evaluate(std::span<const ListView> lists) {
    if (lists.empty()) throw std::invalid_argument("metrics: no lists to evaluate");
    EvalReport rep;
    rep.n = lists.size();
    for (const auto& l : lists) {
        auto rec = evaluate_list(l);
        rep.fra += rec.exact ? 1.0 : 0.0;
        rep.kendall_tau += rec.tau;
        rep.pra += static_cast<double>(rec.concordant) / static_cast<double>(rec.pairs);
        rep.pau += rec.pair_credit / static_cast<double>(rec.pairs);
        rep.p_at_1 += rec.top1 ? 1.0 : 0.0;
        rep.lists.push_back(rec);
    }
    const double n = static_cast<double>(rep.n);
    rep.fra = 100.0 * rep.fra / n;
    rep.kendall_tau /= n;
    rep.pra = 100.0 * rep.pra / n;
    rep.pau = 100.0 * rep.pau / n;
    rep.p_at_1 = 100.0 * rep.p_at_1 / n;
    return rep;
}

double fra(std::span<const ListView> lists) { return evaluate(lists).fra; }
double pra(std::span<const ListView> lists) { return evaluate(lists).pra; }
double pau(std::span<const ListView> lists) { return evaluate(lists).pau; }
double p_at_1(std::span<const ListView> lists) { return evaluate(lists).p_at_1; }

std::string format_summary(const EvalReport& r) {
    std::string s = "n\tfra\tkendall_tau\tpra\tpau\tp_at_1\n";
    s += std::to_string(r.n);
    for (double v : {r.fra, r.kendall_tau, r.pra, r.pau, r.p_at_1}) s += '\t' + util::format_double(v);
    return s + '\n';
}

ScreeningCurves screening_curves(std::span<const std::size_t> ranking, std::span<const double> strengths, std::size_t m) {
    const std::size_t n = strengths.size();
    if (m == 0 || m > n) throw std::invalid_argument("screening_curves: top-m target must be in [1, N]");
    if (ranking.size() != n) throw std::invalid_argument("screening_curves: ranking must cover all candidates");
    std::vector<bool> seen(n, false);
    for (auto c : ranking) {
        if (c >= n || seen[c]) throw std::invalid_argument("screening_curves: ranking is not a permutation");
        seen[c] = true;
    }

    // Strongest first; ties by index.
    std::vector<std::size_t> truth(n);
    std::iota(truth.begin(), truth.end(), std::size_t{0});
    std::stable_sort(truth.begin(), truth.end(), [&](std::size_t a, std::size_t b) { return strengths[a] > strengths[b]; });
    std::vector<bool> top(n, false);
    for (std::size_t i = 0; i < m; ++i) top[truth[i]] = true;

    ScreeningCurves c;
    bool hit = false;
    std::size_t found = 0;
    for (std::size_t i = 0; i < n; ++i) {
        hit = hit || ranking[i] == truth[0];
        found += top[ranking[i]] ? 1 : 0;
        c.hit_rate.push_back(hit ? 1.0 : 0.0);
        c.recall.push_back(static_cast<double>(found) / static_cast<double>(m));
    }
    return c;
}

} // namespace ablist::metrics
