#include <ablist/diff/autograd.hpp>
#include <ablist/diff/ops.hpp>

#include <unordered_set>
#include <utility>

namespace ablist::diff {

Var GradientMap::at(const Node* node) const {
    auto it = grads_.find(node);
    return it == grads_.end() ? Var{} : it->second;
}

namespace {

// Post-order DFS over requires-grad nodes; inputs precede consumers.
std::vector<Node*> topo_order(Node* root) {
    std::vector<Node*> order;
    std::unordered_set<Node*> visited;
    std::vector<std::pair<Node*, std::size_t>> stack{{root, 0}};
    visited.insert(root);
    while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < node->inputs.size()) {
            Node* child = node->inputs[next++].node();
            if (child && child->requires_grad && visited.insert(child).second) stack.emplace_back(child, 0);
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }
    return order;
}

} // namespace

GradientMap run_backward(const Var& output, const Var& grad_output, bool create_graph) {
    if (!output.requires_grad()) {
        throw std::invalid_argument("backward: output is detached from any requires-grad input");
    }
    if (!grad_output.value().same_shape(output.value())) {
        throw ShapeError("backward: seed gradient shape does not match output");
    }
    GradModeGuard mode(create_graph);
    GradientMap result;
    auto& grads = result.grads_;
    grads[output.node()] = grad_output;

    const auto order = topo_order(output.node());
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Node* node = *it;
        if (!node->backward) continue;
        auto found = grads.find(node);
        if (found == grads.end()) continue;
        const Var g = found->second;
        std::vector<Var> input_grads = node->backward(g);
        for (std::size_t k = 0; k < node->inputs.size(); ++k) {
            const Var& in = node->inputs[k];
            if (!in.requires_grad() || !input_grads[k].defined()) continue;
            auto slot = grads.find(in.node());
            if (slot == grads.end()) {
                grads.emplace(in.node(), input_grads[k]);
            } else {
                slot->second = add(slot->second, input_grads[k]);
            }
        }
    }
    return result;
}

GradientMap backward(const Var& loss, bool retain) {
    if (!loss.defined() || loss.value().size() != 1) {
        throw ShapeError("backward: loss must be a scalar");
    }
    GradientMap map = run_backward(loss, Var::constant(Tensor(loss.rows(), loss.cols(), 1.0)), retain);
    for (Node* node : topo_order(loss.node())) {
        if (node->backward) continue;
        Var g = map.at(node);
        if (!g.defined()) continue;
        if (node->grad) {
            for (std::size_t i = 0; i < node->grad->size(); ++i) (*node->grad)[i] += g.value()[i];
        } else {
            node->grad = g.value();
        }
    }
    return map;
}

std::vector<Var> grad(const Var& output, std::span<const Var> wrt, bool create_graph) {
    if (!output.defined() || output.value().size() != 1) {
        throw ShapeError("grad: output must be a scalar");
    }
    GradientMap map = run_backward(output, Var::constant(Tensor(output.rows(), output.cols(), 1.0)),
                                   create_graph);
    std::vector<Var> out;
    out.reserve(wrt.size());
    for (const auto& v : wrt) {
        Var g = map.at(v);
        out.push_back(g.defined() ? g : Var::constant(Tensor(v.value().shape(),
                                                             std::vector<double>(v.value().size(), 0.0))));
    }
    return out;
}

} // namespace ablist::diff
