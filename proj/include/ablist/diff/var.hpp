#pragma once

#include <ablist/diff/tensor.hpp>

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace ablist::diff {

class Var;

/// Maps the gradient flowing into an op's output to one gradient per input.
/// Rules are written with differentiable ops, so running them while grad
/// mode is on tapes the backward pass itself (used for second order).
using BackwardFn = std::function<std::vector<Var>(const Var& grad_out)>;

struct Node {
    Tensor value;
    bool requires_grad = false;
    std::vector<Var> inputs;
    BackwardFn backward;            // empty for leaves
    std::optional<Tensor> grad;     // accumulated by diff::backward on leaves
    const char* op = "leaf";
};

/// Shared handle to a node of the computation graph. Copies alias the same node.
class Var {
public:
    Var() = default;
    explicit Var(Tensor value, bool requires_grad = false);

    static Var constant(Tensor value) { return Var(std::move(value), false); }
    static Var parameter(Tensor value) { return Var(std::move(value), true); }

    bool defined() const { return static_cast<bool>(node_); }
    const Tensor& value() const { return node_->value; }
    /// In-place access for optimizers and checkpoint loading; leaves only.
    Tensor& mutable_value();

    bool requires_grad() const { return node_ && node_->requires_grad; }
    bool is_leaf() const { return !node_->backward; }
    const char* op() const { return node_->op; }

    const std::optional<Tensor>& grad() const { return node_->grad; }
    void zero_grad() { node_->grad.reset(); }

    std::size_t rows() const { return node_->value.rows(); }
    std::size_t cols() const { return node_->value.cols(); }
    double item() const { return node_->value.item(); }

    /// Same value, cut from the graph.
    Var detach() const { return Var(node_->value, false); }

    Node* node() const { return node_.get(); }
    static Var from_node(std::shared_ptr<Node> node);

private:
    std::shared_ptr<Node> node_;
};

bool grad_mode_enabled();

/// RAII switch for graph recording on the current thread.
class GradModeGuard {
public:
    explicit GradModeGuard(bool enabled);
    ~GradModeGuard();
    GradModeGuard(const GradModeGuard&) = delete;
    GradModeGuard& operator=(const GradModeGuard&) = delete;

private:
    bool previous_;
};

class NoGradGuard : public GradModeGuard {
public:
    NoGradGuard() : GradModeGuard(false) {}
};

/// Builds an op result: validates finiteness, and records a node when grad
/// mode is on and any input requires grad.
Var make_result(Tensor value, std::vector<Var> inputs, BackwardFn backward, const char* op);

} // namespace ablist::diff
