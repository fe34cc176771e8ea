// Copyright (C) 2026 The Painter Authors
// SPDX-License-Identifier: Apache-2.0

#include "painter/losses.hpp"

#include "painter/errors.hpp"
#include "painter/maskgen.hpp"

namespace painter::losses {

namespace {

void check_maps(const std::vector<branch::AttentionMap>& maps, const TokenIndexSet& tokens) {
    if (maps.empty()) {
        throw ShapeError("ATAL needs at least one attention map");
    }
    if (tokens.indices.empty()) {
        throw EmptyPromptError("ATAL needs at least one actual token");
    }
    for (const auto& map : maps) {
        const auto& shape = map.probs.shape();
        if (shape.size() != 2 || shape[0] != map.height * map.width || map.height == 0 || map.width == 0) {
            throw ShapeError("attention map " + nn::shape_string(shape) + " does not match its " +
                             std::to_string(map.height) + "x" + std::to_string(map.width) + " grid");
        }
        for (std::size_t j : tokens.indices) {
            if (j >= shape[1]) {
                throw ShapeError("token index " + std::to_string(j) + " outside attention map width");
            }
        }
    }
}

// a_i[p] - m_i[p] for one map.
std::vector<double> residual(const branch::AttentionMap& map, const TokenIndexSet& tokens, const BinaryMask& mask) {
    const SoftMask resized = maskgen::resize_mask(mask, map.height, map.width);
    const std::size_t hw = map.height * map.width;
    const std::size_t len = map.probs.dim(1);
    const double inv_s = 1.0 / static_cast<double>(tokens.indices.size());
    std::vector<double> out(hw);
    for (std::size_t p = 0; p < hw; ++p) {
        double a = 0.0;
        for (std::size_t j : tokens.indices) {
            a += map.probs[p * len + j];
        }
        out[p] = a * inv_s - resized.values()[p];
    }
    return out;
}

double spatial_norm(const branch::AttentionMap& map, Reduction reduction) {
    return reduction == Reduction::mean ? 1.0 / static_cast<double>(map.height * map.width) : 1.0;
}

}  // namespace

TokenIndexSet actual_token_indices(const adapters::TokenizedPrompt& prompt) {
    if (prompt.actual_len < 2 || prompt.actual_len > prompt.ids.size()) {
        throw DomainError("actual token length must lie in [2, L]");
    }
    if (prompt.actual_len == 2) {
        throw EmptyPromptError("prompt has no tokens between SOT and EOT");
    }
    TokenIndexSet out;
    for (std::size_t j = 1; j + 1 < prompt.actual_len; ++j) {
        out.indices.push_back(j);
    }
    return out;
}

double diffusion_loss(const nn::Tensor& eps, const nn::Tensor& eps_pred) {
    if (!eps.same_shape(eps_pred)) {
        throw ShapeError("diffusion loss: " + nn::shape_string(eps.shape()) + " vs " + nn::shape_string(eps_pred.shape()));
    }
    double total = 0.0;
    for (std::size_t i = 0; i < eps.numel(); ++i) {
        const double d = eps[i] - eps_pred[i];
        total += d * d;
    }
    return total / static_cast<double>(eps.numel());
}

double atal_loss(const std::vector<branch::AttentionMap>& maps, const TokenIndexSet& tokens, const BinaryMask& mask,
                 Reduction reduction) {
    check_maps(maps, tokens);
    double total = 0.0;
    for (const auto& map : maps) {
        double layer = 0.0;
        for (double r : residual(map, tokens, mask)) {
            layer += r * r;
        }
        total += layer * spatial_norm(map, reduction);
    }
    return total / static_cast<double>(maps.size());
}

std::vector<nn::Tensor> atal_grad(const std::vector<branch::AttentionMap>& maps, const TokenIndexSet& tokens,
                                  const BinaryMask& mask, Reduction reduction) {
    check_maps(maps, tokens);
    const double inv_n = 1.0 / static_cast<double>(maps.size());
    const double inv_s = 1.0 / static_cast<double>(tokens.indices.size());
    std::vector<nn::Tensor> grads;
    for (const auto& map : maps) {
        const auto r = residual(map, tokens, mask);
        const std::size_t len = map.probs.dim(1);
        const double factor = 2.0 * inv_n * inv_s * spatial_norm(map, reduction);
        nn::Tensor g(map.probs.shape());
        for (std::size_t p = 0; p < r.size(); ++p) {
            for (std::size_t j : tokens.indices) {
                g[p * len + j] = factor * r[p];
            }
        }
        grads.push_back(std::move(g));
    }
    return grads;
}

nn::Var atal_loss_var(const std::vector<branch::AttentionMapVar>& maps, const TokenIndexSet& tokens,
                      const BinaryMask& mask, Reduction reduction) {
    std::vector<branch::AttentionMap> plain;
    std::vector<nn::Var> inputs;
    for (const auto& m : maps) {
        plain.push_back({m.layer, m.height, m.width, m.probs.value()});
        inputs.push_back(m.probs);
    }
    const double value = atal_loss(plain, tokens, mask, reduction);
    auto grads = atal_grad(plain, tokens, mask, reduction);
    return nn::custom_op(std::move(inputs), nn::Tensor({1}, value), [grads = std::move(grads)](const nn::Tensor& up) {
        std::vector<nn::Tensor> out = grads;
        for (auto& g : out) {
            for (auto& v : g.values()) {
                v *= up[0];
            }
        }
        return out;
    });
}

LossBreakdown total_loss(double diff, double atal, double beta) {
    if (!(beta >= 0.0)) {
        throw DomainError("beta must be nonnegative");
    }
    return {diff, atal, beta, diff + beta * atal};
}

}  // namespace painter::losses
