#include <ablist/pretrain/pretrainer.hpp>

#include <ablist/diff/autograd.hpp>
#include <ablist/diff/ops.hpp>
#include <ablist/diff/rng.hpp>
#include <ablist/util/text.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>
#include <stdexcept>

namespace ablist::pretrain {

using diff::Tensor;
using diff::Var;

namespace {

enum : std::uint64_t { kValSplit = 101, kEpochOrder, kWeakView, kStrongView, kValDraw, kPrototypes };

diff::OptimizerConfig sgd(const PretrainConfig& c) {
    diff::OptimizerConfig o;
    o.kind = diff::OptimizerKind::sgd_momentum;
    o.lr = c.lr;
    o.momentum = c.momentum;
    o.weight_decay = c.weight_decay;
    return o;
}

std::vector<double> labeled_values(std::span<const std::optional<double>> labels) {
    std::vector<double> v;
    for (const auto& l : labels)
        if (l) v.push_back(*l);
    return v;
}

} // namespace

void PretrainConfig::validate() const {
    if (epochs == 0) throw std::invalid_argument("pretrain: epochs must be >= 1");
    if (batch < 2) throw std::invalid_argument("pretrain: batch must be >= 2");
    if (val_batch == 0) throw std::invalid_argument("pretrain: val_batch must be >= 1");
    if (!(val_fraction > 0.0 && val_fraction < 1.0)) throw std::invalid_argument("pretrain: val_fraction must be in (0, 1)");
    if (!(tau > 0.0)) throw std::invalid_argument("pretrain: tau must be > 0");
    if (knn == 0) throw std::invalid_argument("pretrain: knn must be >= 1");
    if (prototypes == 0) throw std::invalid_argument("pretrain: prototypes must be >= 1");
    if (!(rho_low >= 0.0 && rho_low <= rho_high && rho_high <= 1.0)) {
        throw std::invalid_argument("pretrain: rho range must satisfy 0 <= low <= high <= 1");
    }
    if (!(beta >= 0.0 && beta <= 1.0)) throw std::invalid_argument("pretrain: beta must be in [0, 1]");
    meta.validate();
}

double PretrainConfig::rho_at(std::size_t epoch) const {
    if (epoch <= warmup + 1 || epochs <= warmup + 1) return rho_low;
    const double frac = static_cast<double>(epoch - warmup - 1) / static_cast<double>(epochs - warmup - 1);
    return rho_low + std::min(frac, 1.0) * (rho_high - rho_low);
}

void write_loss_line(std::ostream& out, const EpochReport& r) {
    out << r.epoch << '\t' << util::format_double(r.ce) << '\t' << util::format_double(r.ins) << '\t'
        << util::format_double(r.clus) << '\t' << (r.pseudo_acc ? util::format_double(*r.pseudo_acc) : std::string("NA"))
        << '\n';
}

Pretrainer::Pretrainer(PretrainConfig cfg, encoder::EncoderWeights weights, std::vector<const graph::PairGraphs*> samples,
                       std::vector<std::optional<double>> labels)
    : cfg_(cfg),
      weights_(std::move(weights)),
      samples_(std::move(samples)),
      thresholds_(tertile_thresholds(labeled_values(labels))),
      state_(PseudoLabelState::init(labels, thresholds_, cfg.beta)),
      optimizer_(sgd(cfg), weights_.list()) {
    cfg_.validate();
    if (labels.size() != samples_.size()) throw std::invalid_argument("pretrain: one label slot per sample required");

    std::vector<std::size_t> labeled;
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i]) labeled.push_back(i);
    if (labeled.size() < 2) throw std::invalid_argument("pretrain: need at least 2 labeled samples");
    std::mt19937_64 rng(diff::derive_seed(cfg_.seed, {kValSplit}));
    std::shuffle(labeled.begin(), labeled.end(), rng);
    const auto n_val = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::llround(cfg_.val_fraction * static_cast<double>(labeled.size()))), 1,
        labeled.size() - 1);
    val_.assign(labeled.begin(), labeled.begin() + static_cast<std::ptrdiff_t>(n_val));
    std::sort(val_.begin(), val_.end());
    for (std::size_t i = 0; i < samples_.size(); ++i)
        if (!std::binary_search(val_.begin(), val_.end(), i)) train_.push_back(i);
    if (train_.size() < 2) throw std::invalid_argument("pretrain: need at least 2 training samples");
}

void Pretrainer::attach_oracle(std::vector<std::size_t> true_columns) {
    if (true_columns.size() != samples_.size()) throw std::invalid_argument("pretrain: oracle length mismatch");
    oracle_ = std::move(true_columns);
}

EpochReport Pretrainer::run_epoch(std::size_t t) {
    using diff::derive_seed;
    EpochReport rep;
    rep.epoch = t;

    std::vector<std::size_t> order = train_;
    std::mt19937_64 rng(derive_seed(cfg_.seed, {kEpochOrder, t}));
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<std::pair<std::size_t, std::size_t>> batches;   // [begin, end)
    for (std::size_t b = 0; b < order.size(); b += cfg_.batch) batches.push_back({b, std::min(b + cfg_.batch, order.size())});
    if (batches.size() > 1 && batches.back().second - batches.back().first < 2) {
        batches[batches.size() - 2].second = batches.back().second;
        batches.pop_back();
    }

    const auto params = weights_.list();
    const bool after_warmup = t > cfg_.warmup;
    for (const auto& [begin, end] : batches) {
        const std::size_t b = end - begin;
        std::vector<std::size_t> rows(order.begin() + static_cast<std::ptrdiff_t>(begin),
                                      order.begin() + static_cast<std::ptrdiff_t>(end));
        std::vector<const graph::PairGraphs*> graphs;
        std::vector<std::uint64_t> weak_seeds, strong_seeds;
        for (auto i : rows) {
            graphs.push_back(samples_[i]);
            weak_seeds.push_back(derive_seed(cfg_.seed, {kWeakView, t, i}));
            strong_seeds.push_back(derive_seed(cfg_.seed, {kStrongView, t, i}));
        }

        const Var e1 = encoder::encode_batch(graphs, weights_, encoder::View::weak, weak_seeds);
        const Var e2 = encoder::encode_batch(graphs, weights_, encoder::View::strong, strong_seeds);
        const Var logits = encoder::class_logits(e1, weights_);
        const Var l_ins = instance_loss(e1, e2, cfg_.tau);
        Var l_clus = Var::constant(Tensor::scalar(0.0));

        if (after_warmup) {
            MetaProblem mp;
            mp.theta = weights_;
            mp.train_logits = logits;
            mp.targets = Tensor(b, kClasses);
            for (std::size_t r = 0; r < b; ++r) {
                for (std::size_t c = 0; c < kClasses; ++c) mp.targets(r, c) = state_.targets(rows[r], c);
                mp.labeled.push_back(state_.labeled[rows[r]]);
            }
            std::vector<std::size_t> val = val_;
            if (val.size() > cfg_.val_batch) {
                std::mt19937_64 vrng(derive_seed(cfg_.seed, {kValDraw, t, begin}));
                std::shuffle(val.begin(), val.end(), vrng);
                val.resize(cfg_.val_batch);
            }
            std::vector<const graph::PairGraphs*> val_graphs;
            mp.val_targets = Tensor(val.size(), kClasses);
            for (std::size_t r = 0; r < val.size(); ++r) {
                val_graphs.push_back(samples_[val[r]]);
                mp.val_targets(r, state_.truth[val[r]]) = 1.0;
            }
            mp.val_logits = [val_graphs](const encoder::EncoderWeights& w) {
                return encoder::class_logits(encoder::encode_batch(val_graphs, w, encoder::View::base), w);
            };
            const auto meta = meta_delta(mp, cfg_.meta);
            ++rep.meta_steps;
            for (std::size_t s = 1; s < meta.objective.size(); ++s)
                if (meta.objective[s] > meta.objective[s - 1]) ++rep.meta_ascents;
            refine_rows(state_, rows, meta.delta);

            const Tensor probs = [&] {
                diff::NoGradGuard no_grad;
                return diff::softmax(Var::constant(logits.value())).value();
            }();
            std::vector<std::size_t> predicted(b);
            std::vector<std::uint8_t> eligible(b, 1);
            const double rho = cfg_.rho_at(t);
            for (std::size_t r = 0; r < b; ++r) {
                std::size_t best = 0;
                for (std::size_t c = 1; c < kClasses; ++c)
                    if (probs(r, c) > probs(r, best)) best = c;
                predicted[r] = best;
                if (cfg_.confidence_filter && !state_.labeled[rows[r]] && probs(r, best) < rho) eligible[r] = 0;
            }
            const Tensor n1 = normalized_rows(e1.value());
            const auto km = kmeans_prototypes(n1, std::min(cfg_.prototypes, b), derive_seed(cfg_.seed, {kPrototypes, t, begin}));
            std::vector<PositiveSet> sets(b);
            std::size_t non_empty = 0;
            for (std::size_t r = 0; r < b; ++r) {
                sets[r].weak = build_positive_set(r, n1, predicted, km.assignment, cfg_.knn, eligible);
                non_empty += sets[r].empty() ? 0 : 1;
            }
            if (non_empty > 0) {
                std::size_t skipped = 0;
                l_clus = cluster_loss(e1, e2, sets, cfg_.tau, &skipped);
                rep.skipped_anchors += skipped;
            } else {
                rep.skipped_anchors += b;
            }
        }

        Tensor target_rows(b, kClasses);
        for (std::size_t r = 0; r < b; ++r)
            for (std::size_t c = 0; c < kClasses; ++c) target_rows(r, c) = state_.targets(rows[r], c);
        const Var l_ce = soft_cross_entropy(logits, Var::constant(std::move(target_rows)));
        const Var total = diff::add(diff::add(l_ce, l_ins), l_clus);
        const auto grads = diff::grad(total, params);
        std::vector<Tensor> g;
        for (const auto& v : grads) g.push_back(v.value());
        optimizer_.step(g);

        rep.ce += l_ce.item();
        rep.ins += l_ins.item();
        rep.clus += l_clus.item();
    }
    const double nb = static_cast<double>(batches.size());
    rep.ce /= nb;
    rep.ins /= nb;
    rep.clus /= nb;

    if (!oracle_.empty()) {
        const auto hard = state_.hard_labels();
        std::size_t hit = 0, total = 0;
        for (std::size_t i = 0; i < hard.size(); ++i) {
            if (state_.labeled[i]) continue;
            ++total;
            hit += hard[i] == oracle_[i] ? 1 : 0;
        }
        if (total > 0) rep.pseudo_acc = static_cast<double>(hit) / static_cast<double>(total);
    }
    return rep;
}

} // namespace ablist::pretrain
