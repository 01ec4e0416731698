#pragma once

#include <ablist/graph/pair.hpp>

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace ablist::synth {

struct SynthConfig {
    std::size_t families = 10;
    std::size_t antigens_per_family = 4;
    std::size_t antibodies_per_antigen = 15;
    double mutation_rate = 0.02;
    std::size_t ab_len_min = 20, ab_len_max = 60;    // CDR
    std::size_t ag_len_min = 40, ag_len_max = 120;
    double labeled_fraction = 0.2;
    double noise_sigma = 0.3;
    std::uint64_t seed = 0;

    std::size_t pair_count() const { return families * antigens_per_family * antibodies_per_antigen; }
    void validate() const;
};

struct Dataset {
    std::vector<graph::AbAgPair> pairs;   // pairs[i].id == i
};

/// Per-pair ground truth. Training code only ever sees Dataset; this table
/// is consumed by evaluation and tests.
struct OracleEntry {
    double y = 0.0;         // noisy log-Kd, as a measurement would report it
    double y_clean = 0.0;   // noiseless log-Kd
};

using OracleTable = std::vector<OracleEntry>;

struct Generated {
    Dataset dataset;
    OracleTable oracle;
};

inline constexpr double kCaStep = 3.8;
inline constexpr double kMaxSideChainOffset = 2.0;
inline constexpr double kLogKdMin = -12.0;
inline constexpr double kLogKdMax = -3.0;
inline constexpr std::size_t kEpitopeWidth = 6;

/// Self-avoiding Cα walk with fixed step plus 1-4 jittered pseudo-atoms per
/// residue; the Cα is always atom 0.
graph::ResidueStructure gen_structure(const std::string& sequence, std::uint64_t seed);

/// Families of point-mutated antigens, several antibodies per antigen, and
/// log-Kd labels from a hidden motif-pairing score plus Gaussian noise. A
/// random (1 - labeled_fraction) share of labels is withheld.
Generated gen_dataset(const SynthConfig& cfg);

/// Candidate ids sorted strongest first by noiseless label; ties by id.
std::vector<std::uint32_t> oracle_rank(std::span<const std::uint32_t> candidates, const OracleTable& oracle);

// Text I/O. Formats are documented in docs/formats.md.
void write_dataset(std::ostream& out, const Dataset& d);
Dataset read_dataset(std::istream& in);
void write_oracle(std::ostream& out, const OracleTable& oracle);
OracleTable read_oracle(std::istream& in);

} // namespace ablist::synth
