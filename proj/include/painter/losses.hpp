// Copyright (C) 2026 The Painter Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "painter/adapters.hpp"
#include "painter/branch.hpp"
#include "painter/raster.hpp"

namespace painter::losses {

inline constexpr double kDefaultBeta = 0.00001;

/// Strictly increasing token positions of the real prompt content.
struct TokenIndexSet {
    std::vector<std::size_t> indices;
};

/// {1, ..., actual_len - 2}: drops SOT, EOT and padding.
/// Throws EmptyPromptError when the prompt has no content tokens.
TokenIndexSet actual_token_indices(const adapters::TokenizedPrompt& prompt);

/// Mean over elements of (eps - eps_pred)^2.
double diffusion_loss(const nn::Tensor& eps, const nn::Tensor& eps_pred);

/// Reduction over spatial positions inside each layer term. `mean` keeps
/// magnitudes resolution-independent; `sum` is the plain squared 2-norm.
enum class Reduction { mean, sum };

/// (1/N) Σ_i reduce_p (a_i[p] - m_i[p])^2 where a_i averages the columns of
/// map i listed in S and m_i is `mask` area-resized to the map's grid.
double atal_loss(const std::vector<branch::AttentionMap>& maps, const TokenIndexSet& tokens, const BinaryMask& mask,
                 Reduction reduction = Reduction::mean);

/// d atal / d probs for every map, same shapes as the inputs.
std::vector<nn::Tensor> atal_grad(const std::vector<branch::AttentionMap>& maps, const TokenIndexSet& tokens,
                                  const BinaryMask& mask, Reduction reduction = Reduction::mean);

/// ATAL as a differentiable node whose backward is atal_grad.
nn::Var atal_loss_var(const std::vector<branch::AttentionMapVar>& maps, const TokenIndexSet& tokens,
                      const BinaryMask& mask, Reduction reduction = Reduction::mean);

struct LossBreakdown {
    double diff = 0.0;
    double atal = 0.0;
    double beta = kDefaultBeta;
    double total = 0.0;
};

/// total = diff + beta·atal. Throws DomainError for beta < 0.
LossBreakdown total_loss(double diff, double atal, double beta = kDefaultBeta);

}  // namespace painter::losses
