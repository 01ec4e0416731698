#pragma once

// Central finite-difference oracle shared by the gradient tests. It only
// evaluates the scalar function on perturbed copies of the inputs, so it is
// independent of the reverse-mode sweep it checks.

#include <ablist/diff/autograd.hpp>
#include <ablist/diff/ops.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

namespace ablist::testing {

using ScalarFn = std::function<diff::Var(const std::vector<diff::Var>&)>;

inline std::vector<diff::Tensor> numeric_gradients(const ScalarFn& f, const std::vector<diff::Tensor>& inputs,
                                                   double h = 1e-5) {
    diff::NoGradGuard no_grad;
    std::vector<diff::Tensor> out;
    for (std::size_t k = 0; k < inputs.size(); ++k) {
        diff::Tensor g(inputs[k].shape(), std::vector<double>(inputs[k].size(), 0.0));
        for (std::size_t i = 0; i < inputs[k].size(); ++i) {
            auto eval = [&](double delta) {
                std::vector<diff::Var> vars;
                for (std::size_t j = 0; j < inputs.size(); ++j) {
                    diff::Tensor t = inputs[j];
                    if (j == k) t[i] += delta;
                    vars.push_back(diff::Var::constant(std::move(t)));
                }
                return f(vars).item();
            };
            g[i] = (eval(h) - eval(-h)) / (2.0 * h);
        }
        out.push_back(std::move(g));
    }
    return out;
}

inline std::vector<diff::Tensor> analytic_gradients(const ScalarFn& f, const std::vector<diff::Tensor>& inputs) {
    std::vector<diff::Var> vars;
    for (const auto& t : inputs) vars.push_back(diff::Var::parameter(t));
    auto grads = diff::grad(f(vars), vars);
    std::vector<diff::Tensor> out;
    for (auto& g : grads) out.push_back(g.value());
    return out;
}

/// ||a - n|| / max(||a||, ||n||, 1e-8) over all inputs jointly.
inline double relative_error(const std::vector<diff::Tensor>& a, const std::vector<diff::Tensor>& n) {
    double diff2 = 0.0, a2 = 0.0, n2 = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        for (std::size_t i = 0; i < a[k].size(); ++i) {
            diff2 += (a[k][i] - n[k][i]) * (a[k][i] - n[k][i]);
            a2 += a[k][i] * a[k][i];
            n2 += n[k][i] * n[k][i];
        }
    }
    return std::sqrt(diff2) / std::max({std::sqrt(a2), std::sqrt(n2), 1e-8});
}

inline double gradient_check(const ScalarFn& f, const std::vector<diff::Tensor>& inputs, double h = 1e-5) {
    return relative_error(analytic_gradients(f, inputs), numeric_gradients(f, inputs, h));
}

inline diff::Tensor random_tensor(std::size_t rows, std::size_t cols, std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> n(0.0, scale);
    diff::Tensor t(rows, cols);
    for (auto& v : t.data()) v = n(rng);
    return t;
}

/// Random entries kept at least `margin` away from zero (ReLU kink avoidance).
inline diff::Tensor random_away_from_zero(std::size_t rows, std::size_t cols, std::mt19937_64& rng,
                                          double margin = 1e-2) {
    std::uniform_real_distribution<double> u(margin, 1.0);
    std::bernoulli_distribution sign(0.5);
    diff::Tensor t(rows, cols);
    for (auto& v : t.data()) v = sign(rng) ? u(rng) : -u(rng);
    return t;
}

} // namespace ablist::testing
