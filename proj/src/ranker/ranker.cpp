#include <ablist/ranker/ranker.hpp>

#include <ablist/diff/ops.hpp>
#include <ablist/metrics/metrics.hpp>
#include <ablist/util/text.hpp>

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <stdexcept>

namespace ablist::ranker {

using diff::Tensor;
using diff::Var;

void RankerConfig::validate() const {
    if (d_in == 0 || d_r == 0) throw std::invalid_argument("ranker: widths must be >= 1");
    if (heads == 0 || d_r % heads != 0) throw std::invalid_argument("ranker: d_r must be divisible by the head count");
    if (mixer == Mixer::isab && inducing == 0) throw std::invalid_argument("ranker: need at least one inducing point");
    if (!(dropout >= 0.0 && dropout < 1.0)) throw std::invalid_argument("ranker: dropout must be in [0, 1)");
}

namespace {

Var glorot(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
    std::uniform_real_distribution<double> u(-limit, limit);
    Tensor t(rows, cols);
    for (auto& v : t.data()) v = u(rng);
    return Var::parameter(std::move(t));
}

Var zeros(std::size_t rows, std::size_t cols) { return Var::parameter(Tensor(rows, cols)); }

AttentionWeights init_attention(std::size_t d, std::mt19937_64& rng) {
    AttentionWeights a;
    a.wq = glorot(d, d, rng);
    a.bq = zeros(1, d);
    a.wk = glorot(d, d, rng);
    a.bk = zeros(1, d);
    a.wv = glorot(d, d, rng);
    a.bv = zeros(1, d);
    a.wo = glorot(d, d, rng);
    a.bo = zeros(1, d);
    return a;
}

void push_attention(std::vector<Var>& out, const AttentionWeights& a) {
    for (const auto* v : {&a.wq, &a.bq, &a.wk, &a.bk, &a.wv, &a.bv, &a.wo, &a.bo}) out.push_back(*v);
}

AttentionWeights pop_attention(std::span<const Var> v, std::size_t& k) {
    AttentionWeights a;
    for (auto* slot : {&a.wq, &a.bq, &a.wk, &a.bk, &a.wv, &a.bv, &a.wo, &a.bo}) *slot = v[k++];
    return a;
}

Var linear(const Var& x, const Var& w, const Var& b) { return diff::add_row(diff::matmul(x, w), b); }

// One keep/drop draw per feature, shared by every row, so a training-mode
// pass stays permutation-equivariant over list members.
Var maybe_dropout(const Var& x, Mode mode) {
    if (!mode.training()) return x;
    const double keep = 1.0 - mode.dropout;
    std::bernoulli_distribution coin(keep);
    std::vector<double> col(x.cols());
    for (auto& v : col) v = coin(*mode.rng) ? 1.0 : 0.0;
    Tensor mask(x.rows(), x.cols());
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t c = 0; c < x.cols(); ++c) mask(i, c) = col[c];
    return diff::dropout_mask(x, mask, keep);
}

Var feed_forward(const Var& x, const FeedForward& f, Mode mode) {
    return linear(maybe_dropout(diff::relu(linear(x, f.w1, f.b1)), mode), f.w2, f.b2);
}

} // namespace

std::vector<Var> RankerParams::list() const {
    std::vector<Var> out{proj_w, proj_b};
    for (const auto& l : layers) {
        if (config.mixer == Mixer::isab) {
            out.push_back(l.inducing);
            push_attention(out, l.to_inducing);
            push_attention(out, l.from_inducing);
        }
        for (const auto* v : {&l.ff.w1, &l.ff.b1, &l.ff.w2, &l.ff.b2}) out.push_back(*v);
    }
    out.push_back(score_w);
    out.push_back(score_b);
    return out;
}

std::vector<std::string> RankerParams::names() const {
    static constexpr const char* kAttn[] = {"wq", "bq", "wk", "bk", "wv", "bv", "wo", "bo"};
    std::vector<std::string> out{"ranker.proj.w", "ranker.proj.b"};
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const std::string p = "ranker.layer" + std::to_string(i) + ".";
        if (config.mixer == Mixer::isab) {
            out.push_back(p + "inducing");
            for (const char* n : kAttn) out.push_back(p + "to_inducing." + n);
            for (const char* n : kAttn) out.push_back(p + "from_inducing." + n);
        }
        for (const char* n : {"ff.w1", "ff.b1", "ff.w2", "ff.b2"}) out.push_back(p + n);
    }
    out.push_back("ranker.score.w");
    out.push_back("ranker.score.b");
    return out;
}

RankerParams RankerParams::from_list(const RankerConfig& config, std::span<const Var> v) {
    RankerParams p;
    p.config = config;
    const std::size_t per_layer = config.mixer == Mixer::isab ? 1 + 8 + 8 + 4 : 4;
    if (v.size() != 4 + per_layer * config.layers) throw std::invalid_argument("ranker: parameter count mismatch");
    std::size_t k = 0;
    p.proj_w = v[k++];
    p.proj_b = v[k++];
    for (std::size_t i = 0; i < config.layers; ++i) {
        IsabLayer l;
        if (config.mixer == Mixer::isab) {
            l.inducing = v[k++];
            l.to_inducing = pop_attention(v, k);
            l.from_inducing = pop_attention(v, k);
        }
        for (auto* slot : {&l.ff.w1, &l.ff.b1, &l.ff.w2, &l.ff.b2}) *slot = v[k++];
        p.layers.push_back(std::move(l));
    }
    p.score_w = v[k++];
    p.score_b = v[k++];
    return p;
}

RankerParams init_ranker(const RankerConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    RankerParams p;
    p.config = cfg;
    p.proj_w = glorot(cfg.d_in, cfg.d_r, rng);
    p.proj_b = zeros(1, cfg.d_r);
    for (std::size_t i = 0; i < cfg.layers; ++i) {
        IsabLayer l;
        if (cfg.mixer == Mixer::isab) {
            Tensor ind(cfg.inducing, cfg.d_r);
            for (auto& v : ind.data()) v = normal(rng);
            l.inducing = Var::parameter(std::move(ind));
            l.to_inducing = init_attention(cfg.d_r, rng);
            l.from_inducing = init_attention(cfg.d_r, rng);
        }
        l.ff = {glorot(cfg.d_r, cfg.d_r, rng), zeros(1, cfg.d_r), glorot(cfg.d_r, cfg.d_r, rng), zeros(1, cfg.d_r)};
        p.layers.push_back(std::move(l));
    }
    p.score_w = glorot(cfg.d_r, 1, rng);
    p.score_b = zeros(1, 1);
    return p;
}

Var mha(const Var& q, const Var& kv, const AttentionWeights& w, std::size_t heads, Mode mode,
        std::vector<Tensor>* weights) {
    const std::size_t d = w.wq.rows();
    if (q.cols() != d || kv.cols() != d) throw diff::ShapeError("mha: input width does not match the projections");
    if (heads == 0 || d % heads != 0) throw diff::ShapeError("mha: width not divisible by the head count");
    const std::size_t dh = d / heads;
    const Var qp = linear(q, w.wq, w.bq);
    const Var kp = linear(kv, w.wk, w.bk);
    const Var vp = linear(kv, w.wv, w.bv);
    std::vector<Var> outs;
    for (std::size_t h = 0; h < heads; ++h) {
        const Var logits = diff::scale(diff::matmul(diff::slice_cols(qp, h * dh, dh), diff::transpose(diff::slice_cols(kp, h * dh, dh))),
                                       1.0 / std::sqrt(static_cast<double>(dh)));
        const Var a = diff::softmax(logits);
        if (weights) weights->push_back(a.value());
        outs.push_back(diff::matmul(a, diff::slice_cols(vp, h * dh, dh)));
    }
    return maybe_dropout(linear(diff::concat_cols(outs), w.wo, w.bo), mode);
}

Var isab_layer(const Var& z, const IsabLayer& layer, std::size_t heads, Mode mode) {
    const Var h = diff::add(mha(layer.inducing, z, layer.to_inducing, heads, mode), layer.inducing);
    const Var y = diff::add(mha(z, h, layer.from_inducing, heads, mode), z);
    return feed_forward(y, layer.ff, mode);
}

Var score_list(const Var& e, const RankerParams& p, Mode mode) {
    if (e.rows() == 0) throw std::invalid_argument("score_list: empty list");
    if (e.cols() != p.config.d_in) throw diff::ShapeError("score_list: embedding width mismatch");
    mode.dropout = p.config.dropout;
    Var z = linear(e, p.proj_w, p.proj_b);
    for (const auto& l : p.layers) {
        z = p.config.mixer == Mixer::isab ? isab_layer(z, l, p.config.heads, mode) : feed_forward(z, l.ff, mode);
    }
    return linear(z, p.score_w, p.score_b);
}

namespace {

void check_scores(const Var& r, std::span<const double> labels) {
    if (r.cols() != 1 || r.rows() != labels.size() || labels.empty()) {
        throw diff::ShapeError("ranking loss: need K x 1 scores matching K >= 1 labels");
    }
    if (!r.value().all_finite()) throw diff::NumericError("ranking loss: non-finite scores");
}

} // namespace

Var listmle_loss(const Var& r, std::span<const double> labels) {
    check_scores(r, labels);
    const std::size_t k = labels.size();
    const auto order = metrics::true_permutation(labels);
    const Var ordered = diff::gather_rows(r, order);
    Tensor suffix(k, k);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i; j < k; ++j) suffix(i, j) = 1.0;
    const Var tails = diff::logsumexp_rows(diff::broadcast_rows(diff::transpose(ordered), k), suffix);
    return diff::sub(diff::sum(tails), diff::sum(ordered));
}

Var mse_loss(const Var& r, std::span<const double> labels) {
    check_scores(r, labels);
    Tensor s(labels.size(), 1);
    for (std::size_t i = 0; i < labels.size(); ++i) s(i, 0) = -labels[i];
    const Var d = diff::sub(r, Var::constant(std::move(s)));
    return diff::scale(diff::sum(diff::mul(d, d)), 1.0 / static_cast<double>(labels.size()));
}

ScoredList make_scored(std::uint64_t list_id, std::vector<std::uint32_t> pairs, std::vector<double> scores) {
    if (pairs.size() != scores.size()) throw std::invalid_argument("make_scored: length mismatch");
    ScoredList s;
    s.list_id = list_id;
    s.perm = metrics::predicted_permutation(scores);
    s.pairs = std::move(pairs);
    s.scores = std::move(scores);
    return s;
}

std::vector<std::uint32_t> aggregate_global_rank(std::span<const ScoredList> lists,
                                                 std::span<const std::uint32_t> candidates) {
    std::map<std::uint32_t, std::pair<double, std::size_t>> acc;
    for (const auto& l : lists)
        for (std::size_t i = 0; i < l.pairs.size(); ++i) {
            auto& [sum, n] = acc[l.pairs[i]];
            sum += l.scores[i];
            ++n;
        }
    std::vector<std::pair<double, std::uint32_t>> means;
    for (auto id : candidates) {
        const auto it = acc.find(id);
        if (it == acc.end()) throw std::invalid_argument("aggregate_global_rank: candidate " + std::to_string(id) + " never scored");
        means.push_back({it->second.first / static_cast<double>(it->second.second), id});
    }
    std::sort(means.begin(), means.end(), [](const auto& a, const auto& b) {
        return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    std::vector<std::uint32_t> out;
    for (const auto& m : means) out.push_back(m.second);
    return out;
}

void write_scored_lists(std::ostream& out, std::span<const ScoredList> lists) {
    out << "# list_id\tscores\tperm\n";
    for (const auto& l : lists) {
        out << l.list_id << '\t' << util::join(l.scores, ',', [](double v) { return util::format_double(v); }) << '\t'
            << util::join(l.perm, ',', [](std::size_t v) { return std::to_string(v); }) << '\n';
    }
}

std::vector<ScoredList> read_scored_lists(std::istream& in) {
    std::vector<ScoredList> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        try {
            const auto f = util::split(line, '\t');
            if (f.size() != 3) throw util::ParseError("expected 3 fields");
            ScoredList s;
            s.list_id = util::parse_int<std::uint64_t>(f[0]);
            for (auto v : util::split(f[1], ',')) s.scores.push_back(util::parse_double(v));
            for (auto v : util::split(f[2], ',')) s.perm.push_back(util::parse_int<std::size_t>(v));
            if (s.perm.size() != s.scores.size()) throw util::ParseError("perm and scores differ in length");
            out.push_back(std::move(s));
        } catch (const std::exception& e) {
            throw util::ParseError("scored lists line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

} // namespace ablist::ranker
