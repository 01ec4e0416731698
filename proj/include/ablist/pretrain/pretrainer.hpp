#pragma once

#include <ablist/diff/optim.hpp>
#include <ablist/encoder/encoder.hpp>
#include <ablist/pretrain/contrastive.hpp>
#include <ablist/pretrain/meta.hpp>
#include <ablist/pretrain/targets.hpp>

#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace ablist::pretrain {

struct PretrainConfig {
    std::size_t epochs = 400;
    std::size_t warmup = 20;
    std::size_t batch = 64;
    std::size_t val_batch = 16;
    double val_fraction = 0.1;
    double lr = 1e-3;
    double momentum = 0.9;
    double weight_decay = 1e-4;
    double tau = 0.07;
    std::size_t knn = 5;
    std::size_t prototypes = 3;
    double rho_low = 0.8;
    double rho_high = 0.95;
    bool confidence_filter = true;
    double beta = 0.9;
    MetaConfig meta;
    std::uint64_t seed = 0;

    void validate() const;
    /// Confidence threshold at epoch t (1-based): linear from rho_low right
    /// after warm-up to rho_high at the last epoch.
    double rho_at(std::size_t epoch) const;
};

struct EpochReport {
    std::size_t epoch = 0;
    double ce = 0.0;                     // batch means
    double ins = 0.0;
    double clus = 0.0;
    std::optional<double> pseudo_acc;    // unlabeled samples, when an oracle is attached
    std::size_t skipped_anchors = 0;
    std::size_t meta_steps = 0;
    std::size_t meta_ascents = 0;        // meta steps whose objective went up (multi-step only)
};

/// `epoch L_CE L_Ins L_Clus pseudo_acc` tab-separated; pseudo_acc is "NA"
/// without an oracle.
void write_loss_line(std::ostream& out, const EpochReport& r);

/// Owns the pseudo-label state and optimizer of one pre-training run over a
/// fixed sample set. The encoder weights are updated in place.
class Pretrainer {
public:
    Pretrainer(PretrainConfig cfg, encoder::EncoderWeights weights, std::vector<const graph::PairGraphs*> samples,
               std::vector<std::optional<double>> labels);

    /// Optional ground-truth class column per sample, used only to report
    /// pseudo-label accuracy.
    void attach_oracle(std::vector<std::size_t> true_columns);

    /// One pass over the training samples for 1-based epoch `t`.
    EpochReport run_epoch(std::size_t t);

    const PseudoLabelState& labels() const { return state_; }
    const Thresholds& thresholds() const { return thresholds_; }
    const std::vector<std::size_t>& validation_indices() const { return val_; }
    const std::vector<std::size_t>& training_indices() const { return train_; }
    const encoder::EncoderWeights& weights() const { return weights_; }

private:
    PretrainConfig cfg_;
    encoder::EncoderWeights weights_;
    std::vector<const graph::PairGraphs*> samples_;
    Thresholds thresholds_;
    PseudoLabelState state_;
    std::vector<std::size_t> train_;
    std::vector<std::size_t> val_;
    diff::Optimizer optimizer_;
    std::vector<std::size_t> oracle_;
};

} // namespace ablist::pretrain
