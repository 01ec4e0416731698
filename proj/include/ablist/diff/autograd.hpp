#pragma once

#include <ablist/diff/var.hpp>

#include <span>
#include <unordered_map>
#include <vector>

namespace ablist::diff {

/// Gradients keyed by graph node, for every node reachable from the output
/// that requires grad.
class GradientMap {
public:
    /// Gradient of `v`, or an undefined Var when `v` is unreachable.
    Var at(const Var& v) const { return at(v.node()); }
    Var at(const Node* node) const;
    bool contains(const Var& v) const { return grads_.count(v.node()) != 0; }
    std::size_t size() const { return grads_.size(); }

private:
    friend GradientMap run_backward(const Var&, const Var&, bool);
    std::unordered_map<const Node*, Var> grads_;
};

/// Core reverse sweep seeded with `grad_output` (same shape as `output`).
/// With `create_graph` the sweep is itself recorded so the returned
/// gradients can be differentiated again.
GradientMap run_backward(const Var& output, const Var& grad_output, bool create_graph);

/// Populates `.grad()` of every requires-grad leaf reachable from the scalar
/// `loss`, accumulating into existing values. With `retain` the returned map
/// holds graph-connected gradients.
GradientMap backward(const Var& loss, bool retain = false);

/// Functional gradient of scalar `output` w.r.t. `wrt`; leaves `.grad()`
/// untouched. Unreachable inputs get a zero gradient of matching shape.
std::vector<Var> grad(const Var& output, std::span<const Var> wrt, bool create_graph = false);

} // namespace ablist::diff
