#include <ablist/cli/checkpoint.hpp>

#include <bit>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <unistd.h>

namespace ablist::cli {

namespace {

constexpr char kMagic[4] = {'A', 'B', 'L', 'W'};
constexpr std::uint32_t kMaxRank = 8;

template <class U>
void put(std::ostream& out, U v) {
    char buf[sizeof(U)];
    for (std::size_t i = 0; i < sizeof(U); ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out.write(buf, sizeof buf);
}

template <class U>
U take(std::istream& in, const char* what) {
    unsigned char buf[sizeof(U)];
    if (!in.read(reinterpret_cast<char*>(buf), sizeof buf)) throw CheckpointError(std::string("checkpoint truncated in ") + what);
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(buf[i]) << (8 * i);
    return v;
}

void put_string(std::ostream& out, const std::string& s) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string take_string(std::istream& in, const char* what) {
    const auto n = take<std::uint32_t>(in, what);
    std::string s(n, '\0');
    if (n > 0 && !in.read(s.data(), n)) throw CheckpointError(std::string("checkpoint truncated in ") + what);
    return s;
}

} // namespace

const diff::Tensor& Checkpoint::get(std::string_view name) const {
    for (const auto& t : tensors)
        if (t.name == name) return t.value;
    throw CheckpointError("checkpoint has no tensor '" + std::string(name) + "'");
}

void write_checkpoint(std::ostream& out, const Checkpoint& c) {
    out.write(kMagic, 4);
    put<std::uint32_t>(out, kCheckpointVersion);
    put<std::uint8_t>(out, static_cast<std::uint8_t>(c.stage));
    put<std::uint64_t>(out, c.config_hash);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(c.tensors.size()));
    for (const auto& t : c.tensors) {
        put_string(out, t.name);
        put<std::uint32_t>(out, static_cast<std::uint32_t>(t.value.rank()));
        for (auto d : t.value.shape()) put<std::uint64_t>(out, d);
        for (double v : t.value.data()) put<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
    }
    put_string(out, c.rng_state);
}

Checkpoint read_checkpoint(std::istream& in) {
    char magic[4];
    if (!in.read(magic, 4) || !std::equal(magic, magic + 4, kMagic)) throw CheckpointError("not a checkpoint (bad magic)");
    const auto version = take<std::uint32_t>(in, "version");
    if (version != kCheckpointVersion) {
        throw CheckpointError("checkpoint version " + std::to_string(version) + " is not supported (expected " +
                              std::to_string(kCheckpointVersion) + ")");
    }
    Checkpoint c;
    const auto stage = take<std::uint8_t>(in, "stage");
    if (stage > 1) throw CheckpointError("checkpoint has unknown stage tag " + std::to_string(stage));
    c.stage = static_cast<Stage>(stage);
    c.config_hash = take<std::uint64_t>(in, "config hash");
    const auto count = take<std::uint32_t>(in, "tensor count");
    for (std::uint32_t i = 0; i < count; ++i) {
        NamedTensor t;
        t.name = take_string(in, "tensor name");
        const auto rank = take<std::uint32_t>(in, "tensor rank");
        if (rank > kMaxRank) throw CheckpointError("tensor '" + t.name + "' has implausible rank");
        std::vector<std::size_t> shape(rank);
        std::size_t n = 1;
        for (auto& d : shape) {
            d = take<std::uint64_t>(in, "tensor dims");
            n *= d;
        }
        std::vector<double> data(n);
        for (auto& v : data) v = std::bit_cast<double>(take<std::uint64_t>(in, "tensor payload"));
        t.value = diff::Tensor(std::move(shape), std::move(data));
        c.tensors.push_back(std::move(t));
    }
    c.rng_state = take_string(in, "rng state");
    if (in.peek() != std::char_traits<char>::eof()) throw CheckpointError("trailing bytes after checkpoint");
    return c;
}

Checkpoint load_checkpoint(const std::filesystem::path& path, Stage stage, std::uint64_t expected_hash) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::filesystem::filesystem_error("cannot open checkpoint", path, std::make_error_code(std::errc::no_such_file_or_directory));
    Checkpoint c = read_checkpoint(in);
    if (c.stage != stage) {
        throw CheckpointError(path.string() + ": expected a " + std::string(to_string(stage)) + " checkpoint, found " +
                              std::string(to_string(c.stage)));
    }
    if (c.config_hash != expected_hash) {
        throw CheckpointError(path.string() + ": config hash mismatch (checkpoint was written under a different config)");
    }
    return c;
}

std::string save_rng(const std::mt19937_64& rng) {
    std::ostringstream s;
    s << rng;
    return s.str();
}

std::mt19937_64 load_rng(const std::string& state) {
    std::istringstream s(state);
    std::mt19937_64 rng;
    if (!(s >> rng)) throw CheckpointError("malformed rng state");
    return rng;
}

void write_atomic(const std::filesystem::path& path, const std::function<void(std::ostream&)>& body, bool binary) {
    auto tmp = path;
    tmp += ".tmp" + std::to_string(::getpid());
    try {
        std::ofstream out(tmp, binary ? std::ios::binary | std::ios::trunc : std::ios::trunc);
        if (!out) throw std::filesystem::filesystem_error("cannot write", tmp, std::make_error_code(std::errc::io_error));
        body(out);
        out.flush();
        if (!out) throw std::filesystem::filesystem_error("write failed", tmp, std::make_error_code(std::errc::io_error));
    } catch (...) {
        std::error_code ignored;
        std::filesystem::remove(tmp, ignored);
        throw;
    }
    std::filesystem::rename(tmp, path);
}

} // namespace ablist::cli
