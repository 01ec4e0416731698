#include <ablist/diff/optim.hpp>

#include <cmath>

namespace ablist::diff {

void OptimizerConfig::validate() const {
    if (!(lr > 0.0)) throw std::invalid_argument("optimizer: lr must be > 0");
    if (!(weight_decay >= 0.0)) throw std::invalid_argument("optimizer: weight_decay must be >= 0");
    if (kind == OptimizerKind::sgd_momentum) {
        if (!(momentum >= 0.0 && momentum < 1.0)) throw std::invalid_argument("optimizer: momentum must be in [0, 1)");
    } else {
        if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0)) {
            throw std::invalid_argument("optimizer: Adam betas must be in (0, 1)");
        }
        if (!(eps > 0.0)) throw std::invalid_argument("optimizer: eps must be > 0");
    }
}

Optimizer::Optimizer(OptimizerConfig config, std::vector<Var> params)
    : config_(config), params_(std::move(params)) {
    config_.validate();
    for (const auto& p : params_) {
        if (!p.requires_grad() || !p.is_leaf()) {
            throw std::invalid_argument("optimizer: parameters must be requires-grad leaves");
        }
    }
}

void Optimizer::step() {
    std::vector<Tensor> grads;
    grads.reserve(params_.size());
    for (std::size_t i = 0; i < params_.size(); ++i) {
        if (!params_[i].grad()) {
            throw std::invalid_argument("optimizer: missing gradient for parameter " + std::to_string(i));
        }
        grads.push_back(*params_[i].grad());
    }
    step(grads);
}

void Optimizer::step(std::span<const Tensor> grads) {
    if (grads.size() != params_.size()) throw std::invalid_argument("optimizer: gradient count mismatch");
    if (m_.empty()) {
        for (const auto& p : params_) {
            m_.emplace_back(p.value().shape(), std::vector<double>(p.value().size(), 0.0));
            if (config_.kind == OptimizerKind::adam) {
                v_.emplace_back(p.value().shape(), std::vector<double>(p.value().size(), 0.0));
            }
        }
    }
    ++t_;
    const double lambda = config_.weight_decay;
    const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));

    // Compute every update before touching parameters so a failure leaves
    // the model unchanged.
    std::vector<Tensor> updates;
    updates.reserve(params_.size());
    for (std::size_t i = 0; i < params_.size(); ++i) {
        const Tensor& theta = params_[i].value();
        const Tensor& g = grads[i];
        if (!g.same_shape(theta)) throw ShapeError("optimizer: gradient shape mismatch");
        Tensor delta(theta.shape(), std::vector<double>(theta.size(), 0.0));
        for (std::size_t k = 0; k < theta.size(); ++k) {
            const double gk = config_.decoupled_decay ? g[k] : g[k] + lambda * theta[k];
            if (config_.kind == OptimizerKind::sgd_momentum) {
                double& buf = m_[i][k];
                buf = (t_ == 1) ? gk : config_.momentum * buf + gk;
                delta[k] = -config_.lr * buf;
            } else {
                double& m = m_[i][k];
                double& v = v_[i][k];
                m = config_.beta1 * m + (1.0 - config_.beta1) * gk;
                v = config_.beta2 * v + (1.0 - config_.beta2) * gk * gk;
                delta[k] = -config_.lr * (m / bc1) / (std::sqrt(v / bc2) + config_.eps);
            }
            if (config_.decoupled_decay) delta[k] -= config_.lr * lambda * theta[k];
        }
        if (!delta.all_finite()) throw NumericError("optimizer: non-finite update");
        updates.push_back(std::move(delta));
    }
    for (std::size_t i = 0; i < params_.size(); ++i) {
        Tensor& theta = params_[i].mutable_value();
        for (std::size_t k = 0; k < theta.size(); ++k) theta[k] += updates[i][k];
    }
}

void Optimizer::zero_grad() {
    for (auto& p : params_) p.zero_grad();
}

} // namespace ablist::diff
