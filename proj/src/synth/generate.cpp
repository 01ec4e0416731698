#include <ablist/synth/synth.hpp>

#include <ablist/diff/rng.hpp>
#include <ablist/graph/features.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace ablist::synth {

namespace {

using graph::Point3;
constexpr std::size_t kAlphabet = graph::kAminoAcids.size();

// Stream tags for derive_seed.
enum : std::uint64_t { kHidden = 1, kFamily, kAntigen, kAntibody, kNoise, kMask, kAgStructure, kAbStructure };

Point3 random_unit(std::mt19937_64& rng) {
    std::normal_distribution<double> n;
    for (;;) {
        Point3 p{n(rng), n(rng), n(rng)};
        const double norm = std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
        if (norm > 1e-12) return {p[0] / norm, p[1] / norm, p[2] / norm};
    }
}

double dist(const Point3& a, const Point3& b) {
    return std::sqrt((a[0] - b[0]) * (a[0] - b[0]) + (a[1] - b[1]) * (a[1] - b[1]) + (a[2] - b[2]) * (a[2] - b[2]));
}

std::string random_sequence(std::size_t length, std::span<const double> profile, std::mt19937_64& rng) {
    std::discrete_distribution<std::size_t> pick(profile.begin(), profile.end());
    std::string s(length, 'A');
    for (auto& c : s) c = graph::kAminoAcids[pick(rng)];
    return s;
}

std::array<double, kAlphabet> composition(std::string_view s) {
    std::array<double, kAlphabet> c{};
    for (char aa : s) c[graph::amino_index(aa)] += 1.0;
    for (auto& v : c) v /= static_cast<double>(s.size());
    return c;
}

void standardize(std::vector<double>& v) {
    const double n = static_cast<double>(v.size());
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    const double sd = std::sqrt(var / n);
    for (auto& x : v) x = sd > 0.0 ? (x - mean) / sd : 0.0;
}

struct Antigen {
    std::string sequence;
    graph::ResidueStructure structure;
    std::size_t family = 0;
    std::array<double, kAlphabet> epitope{};
};

} // namespace

void SynthConfig::validate() const {
    if (families < 1 || antigens_per_family < 1 || antibodies_per_antigen < 1) {
        throw std::invalid_argument("synth: all counts must be >= 1");
    }
    if (!(labeled_fraction > 0.0 && labeled_fraction <= 1.0)) {
        throw std::invalid_argument("synth: labeled_fraction must be in (0, 1]");
    }
    if (!(mutation_rate >= 0.0 && mutation_rate <= 1.0)) throw std::invalid_argument("synth: mutation_rate must be in [0, 1]");
    if (!(noise_sigma >= 0.0)) throw std::invalid_argument("synth: noise_sigma must be >= 0");
    if (ab_len_min < 1 || ab_len_min > ab_len_max) throw std::invalid_argument("synth: bad antibody length range");
    if (ag_len_min < kEpitopeWidth || ag_len_min > ag_len_max) throw std::invalid_argument("synth: bad antigen length range");
    if (ab_len_max > graph::kMaxResidues || ag_len_max > graph::kMaxResidues) {
        throw std::invalid_argument("synth: sequence length exceeds the dense graph cap");
    }
}

graph::ResidueStructure gen_structure(const std::string& sequence, std::uint64_t seed) {
    if (sequence.empty()) throw std::invalid_argument("gen_structure: empty sequence");
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> side_chains(1, 4);
    std::uniform_real_distribution<double> cube(-kMaxSideChainOffset, kMaxSideChainOffset);

    const std::size_t n = sequence.size();
    std::vector<Point3> ca(n);
    ca[0] = {0.0, 0.0, 0.0};
    Point3 prev_dir = random_unit(rng);
    for (std::size_t i = 1; i < n; ++i) {
        Point3 best{};
        Point3 best_dir{};
        double best_clearance = -1.0;
        for (int attempt = 0; attempt < 64; ++attempt) {
            Point3 d = random_unit(rng);
            // Forbid folding straight back on the previous step.
            const double turn = d[0] * prev_dir[0] + d[1] * prev_dir[1] + d[2] * prev_dir[2];
            if (i >= 2 && turn < 0.0) {
                d = {-d[0], -d[1], -d[2]};
            }
            const Point3 c{ca[i - 1][0] + kCaStep * d[0], ca[i - 1][1] + kCaStep * d[1], ca[i - 1][2] + kCaStep * d[2]};
            double clearance = 1e300;
            for (std::size_t j = 0; j + 1 < i; ++j) clearance = std::min(clearance, dist(c, ca[j]));
            if (clearance > best_clearance) {
                best = c;
                best_dir = d;
                best_clearance = clearance;
            }
            if (clearance >= kCaStep) break;
        }
        ca[i] = best;
        prev_dir = best_dir;
    }

    graph::ResidueStructure s;
    s.sequence = sequence;
    s.residues.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto& atoms = s.residues[i];
        atoms.push_back(ca[i]);
        for (int k = side_chains(rng); k > 0; --k) {
            Point3 off;
            do {
                off = {cube(rng), cube(rng), cube(rng)};
            } while (off[0] * off[0] + off[1] * off[1] + off[2] * off[2] > kMaxSideChainOffset * kMaxSideChainOffset);
            atoms.push_back({ca[i][0] + off[0], ca[i][1] + off[1], ca[i][2] + off[2]});
        }
    }
    return s;
}

Generated gen_dataset(const SynthConfig& cfg) {
    cfg.validate();
    using diff::derive_seed;

    // Hidden scoring weights: a global composition preference and a pairing
    // matrix between CDR composition and epitope composition.
    std::mt19937_64 hidden(derive_seed(cfg.seed, {kHidden}));
    std::normal_distribution<double> normal;
    std::array<double, kAlphabet> global_w{};
    for (auto& w : global_w) w = normal(hidden);
    std::vector<double> pairing(kAlphabet * kAlphabet);
    for (auto& w : pairing) w = normal(hidden);

    const std::vector<double> uniform(kAlphabet, 1.0);
    std::vector<Antigen> antigens;
    std::vector<double> family_offset(cfg.families);
    for (std::size_t f = 0; f < cfg.families; ++f) {
        std::mt19937_64 rng(derive_seed(cfg.seed, {kFamily, f}));
        std::uniform_int_distribution<std::size_t> len(cfg.ag_len_min, cfg.ag_len_max);
        const std::string ancestor = random_sequence(len(rng), uniform, rng);
        std::uniform_int_distribution<std::size_t> start(0, ancestor.size() - kEpitopeWidth);
        const std::size_t epitope_at = start(rng);
        family_offset[f] = 0.5 * normal(rng);

        for (std::size_t a = 0; a < cfg.antigens_per_family; ++a) {
            std::mt19937_64 mrng(derive_seed(cfg.seed, {kAntigen, f, a}));
            std::bernoulli_distribution mutate(cfg.mutation_rate);
            std::uniform_int_distribution<std::size_t> other(1, kAlphabet - 1);
            Antigen ag;
            ag.sequence = ancestor;
            for (auto& c : ag.sequence) {
                if (mutate(mrng)) c = graph::kAminoAcids[(graph::amino_index(c) + other(mrng)) % kAlphabet];
            }
            ag.family = f;
            ag.epitope = composition(std::string_view(ag.sequence).substr(epitope_at, kEpitopeWidth));
            ag.structure = gen_structure(ag.sequence, derive_seed(cfg.seed, {kAgStructure, f, a}));
            antigens.push_back(std::move(ag));
        }
    }

    Generated out;
    std::vector<double> global_term, pairing_term;
    std::vector<std::size_t> pair_antigen;
    for (std::size_t g = 0; g < antigens.size(); ++g) {
        for (std::size_t b = 0; b < cfg.antibodies_per_antigen; ++b) {
            std::mt19937_64 rng(derive_seed(cfg.seed, {kAntibody, g, b}));
            std::gamma_distribution<double> gamma(0.6, 1.0);
            std::vector<double> profile(kAlphabet);
            for (auto& p : profile) p = gamma(rng) + 1e-6;
            std::uniform_int_distribution<std::size_t> len(cfg.ab_len_min, cfg.ab_len_max);
            const std::string cdr = random_sequence(len(rng), profile, rng);

            const auto c = composition(cdr);
            double gt = 0.0, pt = 0.0;
            for (std::size_t i = 0; i < kAlphabet; ++i) {
                gt += global_w[i] * c[i];
                for (std::size_t j = 0; j < kAlphabet; ++j) pt += c[i] * pairing[i * kAlphabet + j] * antigens[g].epitope[j];
            }
            global_term.push_back(gt);
            pairing_term.push_back(pt);
            pair_antigen.push_back(g);

            graph::AbAgPair p;
            p.id = static_cast<std::uint32_t>(out.dataset.pairs.size());
            p.ab = gen_structure(cdr, derive_seed(cfg.seed, {kAbStructure, g, b}));
            p.ag = antigens[g].structure;
            p.family = static_cast<std::uint32_t>(antigens[g].family);
            out.dataset.pairs.push_back(std::move(p));
        }
    }

    standardize(global_term);
    standardize(pairing_term);
    std::mt19937_64 noise(derive_seed(cfg.seed, {kNoise}));
    for (std::size_t i = 0; i < out.dataset.pairs.size(); ++i) {
        const double z = 0.9 * global_term[i] + 0.45 * pairing_term[i] + family_offset[antigens[pair_antigen[i]].family];
        OracleEntry e;
        e.y_clean = std::clamp(-7.5 - 1.5 * z, kLogKdMin, kLogKdMax);
        const double eps = normal(noise);
        e.y = std::clamp(e.y_clean + cfg.noise_sigma * eps, kLogKdMin, kLogKdMax);
        out.oracle.push_back(e);
    }

    const std::size_t n = out.dataset.pairs.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 mask(derive_seed(cfg.seed, {kMask}));
    std::shuffle(order.begin(), order.end(), mask);
    const auto n_labeled =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(cfg.labeled_fraction * static_cast<double>(n))));
    for (std::size_t k = 0; k < n_labeled; ++k) out.dataset.pairs[order[k]].affinity = out.oracle[order[k]].y;
    return out;
}

std::vector<std::uint32_t> oracle_rank(std::span<const std::uint32_t> candidates, const OracleTable& oracle) {
    std::vector<std::uint32_t> out(candidates.begin(), candidates.end());
    for (auto id : out)
        if (id >= oracle.size()) throw std::invalid_argument("oracle_rank: unknown candidate id");
    std::sort(out.begin(), out.end(), [&](std::uint32_t a, std::uint32_t b) {
        if (oracle[a].y_clean != oracle[b].y_clean) return oracle[a].y_clean < oracle[b].y_clean;
        return a < b;
    });
    return out;
}

} // namespace ablist::synth
