#include <ablist/ranker/finetune.hpp>

#include <ablist/diff/autograd.hpp>
#include <ablist/diff/ops.hpp>
#include <ablist/diff/rng.hpp>

#include <algorithm>
#include <map>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace ablist::ranker {

using diff::Tensor;
using diff::Var;

namespace {

enum : std::uint64_t { kListOrder = 301, kDropout };

diff::OptimizerConfig adamw(const FinetuneConfig& c) {
    diff::OptimizerConfig o;
    o.kind = diff::OptimizerKind::adam;
    o.lr = c.lr;
    o.weight_decay = c.weight_decay;
    o.decoupled_decay = true;
    return o;
}

std::vector<Var> gcn_params(const encoder::EncoderWeights& w) { return {w.ab.w1, w.ab.w2, w.ag.w1, w.ag.w2}; }

const graph::PairGraphs& lookup(const GraphTable& graphs, std::uint32_t id) {
    if (id >= graphs.size() || graphs[id] == nullptr) throw std::out_of_range("ranker: no graph for pair " + std::to_string(id));
    return *graphs[id];
}

template <class Fn>
void parallel_for(std::size_t n, std::size_t jobs, Fn fn) {
    jobs = std::max<std::size_t>(1, std::min(jobs, n));
    if (jobs == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(jobs);
    for (std::size_t j = 0; j < jobs; ++j) {
        pool.emplace_back([&, j] {
            try {
                for (std::size_t i = j; i < n; i += jobs) fn(i);
            } catch (...) {
                errors[j] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

} // namespace

void FinetuneConfig::validate() const {
    if (epochs == 0) throw std::invalid_argument("finetune: epochs must be >= 1");
    if (batch == 0) throw std::invalid_argument("finetune: batch must be >= 1");
    if (!(lr > 0.0)) throw std::invalid_argument("finetune: lr must be > 0");
    if (!(weight_decay >= 0.0)) throw std::invalid_argument("finetune: weight_decay must be >= 0");
}

Finetuner::Finetuner(FinetuneConfig cfg, encoder::EncoderWeights enc, RankerParams rank, GraphTable graphs)
    : cfg_(cfg),
      enc_(std::move(enc)),
      rank_(std::move(rank)),
      graphs_(std::move(graphs)),
      optimizer_(adamw(cfg), [&] {
          auto p = rank_.list();
          if (!cfg.freeze_encoder) {
              const auto g = gcn_params(enc_);
              p.insert(p.end(), g.begin(), g.end());
          }
          return p;
      }()) {
    cfg_.validate();
    if (cfg_.freeze_encoder) frozen_.resize(graphs_.size());
}

std::vector<Var> Finetuner::trainable() const { return optimizer_.params(); }

Var Finetuner::embed(std::span<const std::uint32_t> ids) {
    if (!cfg_.freeze_encoder) {
        std::vector<const graph::PairGraphs*> g;
        for (auto id : ids) g.push_back(&lookup(graphs_, id));
        return encoder::encode_batch(g, enc_, encoder::View::base);
    }
    std::vector<Var> rows;
    for (auto id : ids) {
        auto& slot = frozen_.at(id);
        if (!slot) {
            diff::NoGradGuard no_grad;
            slot = encoder::encode_pair(lookup(graphs_, id), enc_, encoder::View::base).value();
        }
        rows.push_back(Var::constant(*slot));
    }
    return diff::concat_rows(rows);
}

double Finetuner::run_epoch(std::span<const listsample::RankingList> lists, std::size_t t) {
    if (lists.empty()) throw std::invalid_argument("finetune: no lists");
    std::vector<std::size_t> order(lists.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 shuffle_rng(diff::derive_seed(cfg_.seed, {kListOrder, t}));
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    std::mt19937_64 drop_rng(diff::derive_seed(cfg_.seed, {kDropout, t}));

    const auto params = trainable();
    double total = 0.0;
    for (std::size_t b = 0; b < order.size(); b += cfg_.batch) {
        const std::size_t end = std::min(b + cfg_.batch, order.size());
        // Embed each distinct member once per step.
        std::map<std::uint32_t, std::size_t> row_of;
        std::vector<std::uint32_t> ids;
        for (std::size_t k = b; k < end; ++k)
            for (auto id : lists[order[k]].pairs)
                if (row_of.emplace(id, ids.size()).second) ids.push_back(id);
        const Var e = embed(ids);

        std::vector<Var> losses;
        for (std::size_t k = b; k < end; ++k) {
            const auto& l = lists[order[k]];
            std::vector<std::size_t> rows;
            for (auto id : l.pairs) rows.push_back(row_of.at(id));
            const Var r = score_list(diff::gather_rows(e, rows), rank_, Mode{&drop_rng});
            losses.push_back(cfg_.loss == RankLoss::listmle ? listmle_loss(r, l.labels) : mse_loss(r, l.labels));
        }
        const Var loss = diff::scale(diff::sum(diff::concat_rows(losses)), 1.0 / static_cast<double>(losses.size()));
        const auto grads = diff::grad(loss, params);
        std::vector<Tensor> g;
        for (const auto& v : grads) g.push_back(v.value());
        optimizer_.step(g);
        total += loss.item() * static_cast<double>(losses.size());
    }
    return total / static_cast<double>(lists.size());
}

std::vector<Tensor> embed_pairs(std::span<const std::uint32_t> ids, const encoder::EncoderWeights& enc,
                                const GraphTable& graphs, std::size_t jobs) {
    std::vector<Tensor> out(ids.size());
    parallel_for(ids.size(), jobs, [&](std::size_t i) {
        diff::NoGradGuard no_grad;
        out[i] = encoder::encode_pair(lookup(graphs, ids[i]), enc, encoder::View::base).value();
    });
    return out;
}

std::vector<ScoredList> score_lists(std::span<const listsample::RankingList> lists, const encoder::EncoderWeights& enc,
                                    const RankerParams& rank, const GraphTable& graphs, std::size_t jobs) {
    std::map<std::uint32_t, std::size_t> row_of;
    std::vector<std::uint32_t> ids;
    for (const auto& l : lists)
        for (auto id : l.pairs)
            if (row_of.emplace(id, ids.size()).second) ids.push_back(id);
    const auto emb = embed_pairs(ids, enc, graphs, jobs);

    std::vector<ScoredList> out(lists.size());
    parallel_for(lists.size(), jobs, [&](std::size_t i) {
        diff::NoGradGuard no_grad;
        const auto& l = lists[i];
        std::vector<Var> rows;
        for (auto id : l.pairs) rows.push_back(Var::constant(emb[row_of.at(id)]));
        const Tensor r = score_list(diff::concat_rows(rows), rank).value();
        out[i] = make_scored(l.list_id, l.pairs, std::vector<double>(r.data().begin(), r.data().end()));
    });
    return out;
}

} // namespace ablist::ranker
