#include <ablist/diff/var.hpp>

#include <algorithm>

namespace ablist::diff {

namespace {
thread_local bool g_grad_mode = true;
} // namespace

Var::Var(Tensor value, bool requires_grad) : node_(std::make_shared<Node>()) {
    node_->value = std::move(value);
    node_->requires_grad = requires_grad;
}

Tensor& Var::mutable_value() {
    if (node_->backward) throw std::logic_error("var: mutable_value on non-leaf node");
    return node_->value;
}

Var Var::from_node(std::shared_ptr<Node> node) {
    Var v;
    v.node_ = std::move(node);
    return v;
}

bool grad_mode_enabled() { return g_grad_mode; }

GradModeGuard::GradModeGuard(bool enabled) : previous_(g_grad_mode) { g_grad_mode = enabled; }

GradModeGuard::~GradModeGuard() { g_grad_mode = previous_; }

Var make_result(Tensor value, std::vector<Var> inputs, BackwardFn backward, const char* op) {
    if (!value.all_finite()) {
        throw NumericError(std::string("non-finite output from op '") + op + "'");
    }
    const bool record = g_grad_mode &&
        std::any_of(inputs.begin(), inputs.end(), [](const Var& v) { return v.requires_grad(); });
    auto node = std::make_shared<Node>();
    node->value = std::move(value);
    node->op = op;
    if (record) {
        node->requires_grad = true;
        node->inputs = std::move(inputs);
        node->backward = std::move(backward);
    }
    return Var::from_node(std::move(node));
}

} // namespace ablist::diff
