#pragma once

#include <ablist/encoder/encoder.hpp>

#include <functional>
#include <vector>

namespace ablist::pretrain {

/// -(1/B) sum_i sum_c targets_ic * log softmax(logits)_ic.
diff::Var soft_cross_entropy(const diff::Var& logits, const diff::Var& targets);

/// theta' = theta - alpha * grad_theta CE(train_logits, soft_targets). The
/// gradient is taped, so theta' stays differentiable with respect to
/// anything `soft_targets` depends on.
encoder::EncoderWeights virtual_update(const encoder::EncoderWeights& theta, const diff::Var& train_logits,
                                       const diff::Var& soft_targets, double alpha);

enum class DeltaNorm { none, batch, row };

struct MetaConfig {
    double alpha = 1e-3;      // virtual step
    double delta_lr = 1.0;    // outer step on the perturbation
    std::size_t steps = 1;
    DeltaNorm norm = DeltaNorm::batch;
    /// Project the step onto perturbations whose columns sum to zero over the
    /// unlabeled rows, so a batch-wide class shift is not applied to every row.
    bool center = true;
    void validate() const;
};

/// Inputs of one bi-level refinement.
struct MetaProblem {
    encoder::EncoderWeights theta;
    diff::Var train_logits;                  // B x 3, computed from theta
    diff::Tensor targets;                    // B x 3 current soft targets
    std::vector<std::uint8_t> labeled;       // B
    std::function<diff::Var(const encoder::EncoderWeights&)> val_logits;
    diff::Tensor val_targets;                // V x 3
};

/// Validation cross-entropy g(delta) after the virtual update. Labeled rows
/// of delta are ignored.
double meta_objective(const MetaProblem& p, const diff::Tensor& delta, double alpha);

/// Second-order gradient of g at delta; zero on labeled rows.
diff::Tensor meta_gradient(const MetaProblem& p, const diff::Tensor& delta, double alpha, double* objective = nullptr);

struct MetaResult {
    diff::Tensor delta;                 // labeled rows zero
    std::vector<double> objective;      // g before each step
};

/// `steps` descent iterations on g from delta = 0. Step scaling follows
/// cfg.norm: the gradient is divided by its largest magnitude over the batch
/// (batch) or per row (row) before multiplying by delta_lr.
MetaResult meta_delta(const MetaProblem& p, const MetaConfig& cfg);

} // namespace ablist::pretrain
