#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace ablist::metrics {

// Labels y are log-Kd (lower = stronger). Internally everything is judged on
// strength s = -y, and both permutations list the strongest item first.

/// Indices sorted by descending score; ties keep the lower index first.
std::vector<std::size_t> predicted_permutation(std::span<const double> scores);
/// Indices sorted by ascending label (descending strength); ties by index.
std::vector<std::size_t> true_permutation(std::span<const double> labels);

/// Scores and labels of one list.
struct ListView {
    std::span<const double> scores;
    std::span<const double> labels;
};

struct ListRecord {
    double tau = 0.0;
    std::size_t concordant = 0;
    std::size_t discordant = 0;
    std::size_t pairs = 0;          // pairs with distinct labels
    double pair_credit = 0.0;       // AUC credit: 1 per correct pair, 0.5 per score tie
    bool exact = false;
    bool top1 = false;
};

/// Throws std::invalid_argument for K < 2, size mismatch or non-finite input.
ListRecord evaluate_list(ListView list);

/// (CP - DP) / (K(K-1)/2); score ties count as neither.
double kendall_tau(std::span<const double> scores, std::span<const double> labels);

struct EvalReport {
    std::vector<ListRecord> lists;
    double fra = 0.0;           // percentages except kendall_tau
    double kendall_tau = 0.0;
    double pra = 0.0;
    double pau = 0.0;
    double p_at_1 = 0.0;
    std::size_t n = 0;
};

EvalReport evaluate(std::span<const ListView> lists);

double fra(std::span<const ListView> lists);
double pra(std::span<const ListView> lists);
double pau(std::span<const ListView> lists);
double p_at_1(std::span<const ListView> lists);

/// Tab-separated one-line summary: `n fra kendall_tau pra pau p_at_1`.
std::string format_summary(const EvalReport& r);

struct ScreeningCurves {
    std::vector<double> hit_rate;   // index n-1 holds the value after n screens
    std::vector<double> recall;
};

/// `ranking` is the screening order over candidates 0..N-1; `strengths` are
/// the true strengths indexed by candidate. Throws when m is 0 or exceeds N.
ScreeningCurves screening_curves(std::span<const std::size_t> ranking, std::span<const double> strengths, std::size_t m);

} // namespace ablist::metrics
