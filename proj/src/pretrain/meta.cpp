#include <ablist/pretrain/meta.hpp>

#include <ablist/diff/autograd.hpp>
#include <ablist/diff/ops.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ablist::pretrain {

using diff::Tensor;
using diff::Var;

Var soft_cross_entropy(const Var& logits, const Var& targets) {
    if (!logits.value().same_shape(targets.value())) throw diff::ShapeError("soft_cross_entropy: shape mismatch");
    const double b = static_cast<double>(logits.rows());
    return diff::scale(diff::sum(diff::mul(targets, diff::log_softmax(logits))), -1.0 / b);
}

encoder::EncoderWeights virtual_update(const encoder::EncoderWeights& theta, const Var& train_logits,
                                       const Var& soft_targets, double alpha) {
    const auto params = theta.list();
    const Var loss = soft_cross_entropy(train_logits, soft_targets);
    const auto grads = diff::grad(loss, params, /*create_graph=*/true);
    std::vector<Var> updated;
    diff::GradModeGuard taped(true);
    for (std::size_t k = 0; k < params.size(); ++k) updated.push_back(diff::sub(params[k], diff::scale(grads[k], alpha)));
    return encoder::EncoderWeights::from_list(updated);
}

void MetaConfig::validate() const {
    if (!(alpha >= 0.0)) throw std::invalid_argument("meta: alpha must be >= 0");
    if (!(delta_lr > 0.0)) throw std::invalid_argument("meta: delta_lr must be > 0");
    if (steps == 0) throw std::invalid_argument("meta: steps must be >= 1");
}

namespace {

void check_problem(const MetaProblem& p, const Tensor& delta) {
    if (!p.targets.same_shape(delta) || p.train_logits.value().shape() != p.targets.shape()) {
        throw diff::ShapeError("meta: targets, delta and train logits must share a shape");
    }
    if (p.labeled.size() != p.targets.rows()) throw std::invalid_argument("meta: labeled mask length mismatch");
    if (p.val_targets.empty() || p.val_targets.rows() == 0) throw std::invalid_argument("meta: empty validation batch");
}

Tensor unlabeled_mask(const MetaProblem& p) {
    Tensor m(p.targets.rows(), p.targets.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        if (!p.labeled[i])
            for (std::size_t c = 0; c < m.cols(); ++c) m(i, c) = 1.0;
    return m;
}

Var val_loss(const MetaProblem& p, const Var& delta_leaf, double alpha) {
    diff::GradModeGuard taped(true);
    const Var soft = diff::add(Var::constant(p.targets), diff::mul(delta_leaf, Var::constant(unlabeled_mask(p))));
    const auto theta_prime = virtual_update(p.theta, p.train_logits, soft, alpha);
    return soft_cross_entropy(p.val_logits(theta_prime), Var::constant(p.val_targets));
}

} // namespace

double meta_objective(const MetaProblem& p, const Tensor& delta, double alpha) {
    check_problem(p, delta);
    return val_loss(p, Var::constant(delta), alpha).item();
}

Tensor meta_gradient(const MetaProblem& p, const Tensor& delta, double alpha, double* objective) {
    check_problem(p, delta);
    const Var leaf = Var::parameter(delta);
    const Var loss = val_loss(p, leaf, alpha);
    if (objective) *objective = loss.item();
    const Var leaves[] = {leaf};
    Tensor g = diff::grad(loss, leaves)[0].value();
    if (!g.all_finite()) throw diff::NumericError("meta: non-finite perturbation gradient");
    return g;
}

MetaResult meta_delta(const MetaProblem& p, const MetaConfig& cfg) {
    cfg.validate();
    MetaResult r;
    r.delta = Tensor(p.targets.rows(), p.targets.cols());
    for (std::size_t s = 0; s < cfg.steps; ++s) {
        double g0 = 0.0;
        Tensor g = meta_gradient(p, r.delta, cfg.alpha, &g0);
        r.objective.push_back(g0);
        const std::size_t rows = g.rows(), cols = g.cols();
        if (cfg.center) {
            std::size_t n_free = 0;
            std::vector<double> mean(cols, 0.0);
            for (std::size_t i = 0; i < rows; ++i) {
                if (p.labeled[i]) continue;
                ++n_free;
                for (std::size_t c = 0; c < cols; ++c) mean[c] += g(i, c);
            }
            for (std::size_t i = 0; i < rows && n_free > 0; ++i)
                if (!p.labeled[i])
                    for (std::size_t c = 0; c < cols; ++c) g(i, c) -= mean[c] / static_cast<double>(n_free);
        }
        for (std::size_t i = 0; i < rows; ++i) {
            double row_max = 0.0;
            for (std::size_t c = 0; c < cols; ++c) row_max = std::max(row_max, std::abs(g(i, c)));
            if (cfg.norm == DeltaNorm::row && row_max > 0.0)
                for (std::size_t c = 0; c < cols; ++c) g(i, c) /= row_max;
        }
        if (cfg.norm == DeltaNorm::batch) {
            double m = 0.0;
            for (double v : g.data()) m = std::max(m, std::abs(v));
            if (m > 0.0)
                for (auto& v : g.data()) v /= m;
        }
        for (std::size_t k = 0; k < g.size(); ++k) r.delta[k] -= cfg.delta_lr * g[k];
    }
    for (std::size_t i = 0; i < r.delta.rows(); ++i)
        if (p.labeled[i])
            for (std::size_t c = 0; c < r.delta.cols(); ++c) r.delta(i, c) = 0.0;
    return r;
}

} // namespace ablist::pretrain
