#pragma once

#include <ablist/diff/var.hpp>

#include <span>
#include <string>
#include <vector>

namespace ablist::diff {

enum class OptimizerKind { sgd_momentum, adam };

struct OptimizerConfig {
    OptimizerKind kind = OptimizerKind::sgd_momentum;
    double lr = 1e-3;
    double momentum = 0.9;       // SGD
    double beta1 = 0.9;          // Adam
    double beta2 = 0.999;        // Adam
    double eps = 1e-8;           // Adam
    double weight_decay = 0.0;   // added as lambda * theta to the gradient
    bool decoupled_decay = false; // instead shrink theta by lr * lambda after the step (AdamW)

    void validate() const;
};

/// Optimizer over a fixed parameter list. Moment buffers are created lazily
/// with the parameter shapes on the first step.
class Optimizer {
public:
    Optimizer(OptimizerConfig config, std::vector<Var> params);

    /// Applies one update with explicit gradients (one per parameter).
    void step(std::span<const Tensor> grads);
    /// Applies one update from the parameters' accumulated `.grad()`.
    void step();
    void zero_grad();

    const OptimizerConfig& config() const { return config_; }
    const std::vector<Var>& params() const { return params_; }
    std::size_t steps_taken() const { return t_; }

    // Exposed for checkpointing.
    std::vector<Tensor>& first_moments() { return m_; }
    std::vector<Tensor>& second_moments() { return v_; }
    void set_steps_taken(std::size_t t) { t_ = t; }

private:
    OptimizerConfig config_;
    std::vector<Var> params_;
    std::vector<Tensor> m_;   // SGD momentum buffer or Adam first moment
    std::vector<Tensor> v_;   // Adam second moment
    std::size_t t_ = 0;
};

} // namespace ablist::diff
