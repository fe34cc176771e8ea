// Copyright (C) 2026 The Painter Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "painter/autograd.hpp"

namespace painter::testing {

using ScalarFn = std::function<nn::Var(const std::vector<nn::Var>&)>;

/// Worst relative error between backward() gradients and central differences
/// over every entry of every input. Relative error uses max(|a|,|n|, floor).
inline double gradcheck(const ScalarFn& fn, const std::vector<nn::Tensor>& inputs, double step = 1e-6,
                        double floor = 1e-8) {
    std::vector<nn::Var> params;
    for (const auto& t : inputs) {
        params.push_back(nn::parameter(t));
    }
    const nn::Var loss = fn(params);
    nn::backward(loss);

    double worst = 0.0;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        for (std::size_t e = 0; e < inputs[i].numel(); ++e) {
            const auto eval = [&](double delta) {
                std::vector<nn::Var> vars;
                for (std::size_t j = 0; j < inputs.size(); ++j) {
                    nn::Tensor t = inputs[j];
                    if (j == i) {
                        t[e] += delta;
                    }
                    vars.push_back(nn::constant(std::move(t)));
                }
                return fn(vars).value()[0];
            };
            const double numeric = (eval(step) - eval(-step)) / (2.0 * step);
            const double analytic = params[i].grad().numel() ? params[i].grad()[e] : 0.0;
            const double scale = std::max({std::abs(numeric), std::abs(analytic), floor});
            worst = std::max(worst, std::abs(numeric - analytic) / scale);
        }
    }
    return worst;
}

}  // namespace painter::testing
