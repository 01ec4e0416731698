#include <ablist/synth/synth.hpp>

#include <ablist/util/text.hpp>

#include <istream>
#include <ostream>

namespace ablist::synth {

namespace {

constexpr std::string_view kDatasetHeader = "# id\tab_seq\tag_seq\tab_atoms\tab_coords\tag_atoms\tag_coords\taffinity\tfamily";
constexpr std::string_view kOracleHeader = "# id\ty\ty_clean";

void write_structure(std::ostream& out, const graph::ResidueStructure& s) {
    out << util::join(s.residues, ',', [](const auto& r) { return std::to_string(r.size()); }) << '\t';
    bool first = true;
    for (const auto& r : s.residues) {
        for (const auto& p : r) {
            for (double c : p) {
                if (!first) out << ',';
                out << util::format_double(c);
                first = false;
            }
        }
    }
}

graph::ResidueStructure read_structure(std::string_view seq, std::string_view counts, std::string_view coords) {
    graph::ResidueStructure s;
    s.sequence = std::string(seq);
    const auto c = util::split(coords, ',');
    std::size_t k = 0;
    for (auto n_sv : util::split(counts, ',')) {
        const auto n = util::parse_int<std::size_t>(n_sv);
        std::vector<graph::Point3> atoms;
        for (std::size_t a = 0; a < n; ++a) {
            if (k + 3 > c.size()) throw util::ParseError("dataset: coordinate list shorter than atom counts");
            atoms.push_back({util::parse_double(c[k]), util::parse_double(c[k + 1]), util::parse_double(c[k + 2])});
            k += 3;
        }
        s.residues.push_back(std::move(atoms));
    }
    if (k != c.size()) throw util::ParseError("dataset: coordinate list longer than atom counts");
    s.validate();
    return s;
}

bool skip_line(const std::string& line) { return line.empty() || line[0] == '#'; }

} // namespace

void write_dataset(std::ostream& out, const Dataset& d) {
    out << kDatasetHeader << '\n';
    for (const auto& p : d.pairs) {
        out << p.id << '\t' << p.ab.sequence << '\t' << p.ag.sequence << '\t';
        write_structure(out, p.ab);
        out << '\t';
        write_structure(out, p.ag);
        out << '\t' << (p.affinity ? util::format_double(*p.affinity) : std::string("NA")) << '\t' << p.family << '\n';
    }
}

Dataset read_dataset(std::istream& in) {
    Dataset d;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (skip_line(line)) continue;
        try {
            const auto f = util::split(line, '\t');
            if (f.size() != 9) throw util::ParseError("expected 9 fields, got " + std::to_string(f.size()));
            graph::AbAgPair p;
            p.id = util::parse_int<std::uint32_t>(f[0]);
            if (p.id != d.pairs.size()) throw util::ParseError("ids must be consecutive from 0");
            p.ab = read_structure(f[1], f[3], f[4]);
            p.ag = read_structure(f[2], f[5], f[6]);
            if (f[7] != "NA") p.affinity = util::parse_double(f[7]);
            p.family = util::parse_int<std::uint32_t>(f[8]);
            d.pairs.push_back(std::move(p));
        } catch (const std::exception& e) {
            throw util::ParseError("dataset line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (d.pairs.empty()) throw util::ParseError("dataset: no records");
    return d;
}

void write_oracle(std::ostream& out, const OracleTable& oracle) {
    out << kOracleHeader << '\n';
    for (std::size_t i = 0; i < oracle.size(); ++i) {
        out << i << '\t' << util::format_double(oracle[i].y) << '\t' << util::format_double(oracle[i].y_clean) << '\n';
    }
}

OracleTable read_oracle(std::istream& in) {
    OracleTable t;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (skip_line(line)) continue;
        const auto f = util::split(line, '\t');
        if (f.size() != 3 || util::parse_int<std::size_t>(f[0]) != t.size()) {
            throw util::ParseError("oracle line " + std::to_string(line_no) + ": malformed record");
        }
        t.push_back({util::parse_double(f[1]), util::parse_double(f[2])});
    }
    return t;
}

} // namespace ablist::synth
