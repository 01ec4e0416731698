#pragma once

#include <ablist/cli/config.hpp>
#include <ablist/diff/tensor.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

namespace ablist::cli {

class CheckpointError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct NamedTensor {
    std::string name;
    diff::Tensor value;
    friend bool operator==(const NamedTensor&, const NamedTensor&) = default;
};

/// Binary layout (all integers little-endian):
///   "ABLW" | u32 version | u8 stage | u64 config hash | u32 count |
///   count x (u32 name length | name | u32 rank | rank x u64 dim | f64 payload) |
///   u32 rng length | rng text (std::mt19937_64 stream form)
struct Checkpoint {
    Stage stage = Stage::pretrain;
    std::uint64_t config_hash = 0;
    std::vector<NamedTensor> tensors;
    std::string rng_state;

    const diff::Tensor& get(std::string_view name) const;

    friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

void write_checkpoint(std::ostream& out, const Checkpoint& c);
Checkpoint read_checkpoint(std::istream& in);

/// Reads `path` and checks version, stage and config hash against the
/// expectation, failing with CheckpointError on any mismatch.
Checkpoint load_checkpoint(const std::filesystem::path& path, Stage stage, std::uint64_t expected_hash);

std::string save_rng(const std::mt19937_64& rng);
std::mt19937_64 load_rng(const std::string& state);

/// Writes through a sibling temp file and renames it over `path`.
void write_atomic(const std::filesystem::path& path, const std::function<void(std::ostream&)>& body,
                  bool binary = false);

} // namespace ablist::cli
