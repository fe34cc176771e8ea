// Copyright (C) 2026 The Painter Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "painter/autograd.hpp"
#include "painter/tensor.hpp"

namespace painter::branch {

using ParamSet = std::map<std::string, nn::Tensor>;
using VarMap = std::map<std::string, nn::Var>;

struct LayerSpec {
    std::size_t width = 32;
    std::size_t scale = 1;  // spatial divisor relative to the latent, a power of two
    bool attention = false;

    bool operator==(const LayerSpec&) const = default;
};

/// Shape description of a small conditional denoiser.
///
/// stem (3×3 conv) → N residual layers, each optionally followed by a
/// multi-head cross-attention block over the text context → 3×3 output conv.
/// Every layer receives a time-embedding bias.
struct DenoiserSpec {
    std::size_t in_channels = 4;
    std::size_t out_channels = 4;
    std::size_t stem_width = 32;
    std::vector<LayerSpec> layers;
    std::size_t heads = 1;
    std::size_t head_dim = 32;     // d_i
    std::size_t text_dim = 32;
    std::size_t token_length = 77;  // L
    std::size_t time_dim = 32;
    std::size_t latent_height = 16;
    std::size_t latent_width = 16;

    /// Throws ShapeError when inconsistent.
    void validate() const;

    std::size_t layer_count() const { return layers.size(); }
    std::vector<std::size_t> attention_sites() const;
    /// Channel width feeding layer i (stem width for i = 0).
    std::size_t layer_input_width(std::size_t i) const;

    /// 4×16×16 latent, four layers of width 32 at scales 1,2,2,1 and one
    /// single-head attention site (d = 32) on layer 2.
    static DenoiserSpec toy(std::size_t token_length = 77);

    bool operator==(const DenoiserSpec&) const = default;
};

/// Canonical parameter names and shapes for `spec`, sorted by name.
std::vector<std::pair<std::string, nn::Shape>> param_shapes(const DenoiserSpec& spec);

/// Fan-in scaled Gaussian initialization.
ParamSet init_params(const DenoiserSpec& spec, std::uint64_t seed);

/// Throws ShapeError naming the first missing, extra or misshaped tensor.
void check_params(const DenoiserSpec& spec, const ParamSet& params);

std::size_t param_count(const ParamSet& params);

VarMap to_vars(const ParamSet& params, bool trainable);

enum class AttnInjection { post, pre };

/// Additive features injected into a forward pass, indexed by layer.
/// An empty Var means nothing is injected at that site.
struct Injection {
    std::vector<nn::Var> layer_inputs;
    std::vector<nn::Var> attention;
    AttnInjection mode = AttnInjection::post;
};

/// Head-averaged attention probabilities of one site, (height·width)×L.
struct AttentionMapVar {
    std::size_t layer = 0;
    std::size_t height = 0;
    std::size_t width = 0;
    nn::Var probs;
};

/// Per-layer intermediates recorded during a forward pass.
struct Trace {
    std::vector<nn::Var> layer_outputs;
    std::vector<nn::Var> attention_outputs;  // empty Var for layers without attention
    std::vector<AttentionMapVar> attention_maps;
};

/// Sinusoidal embedding of timestep t, length dim.
nn::Tensor timestep_embedding(std::size_t t, std::size_t dim);

/// Runs the denoiser. x: in_channels×h×w with h, w divisible by every layer
/// scale; context: L×text_dim.
nn::Var denoiser_forward(const DenoiserSpec& spec, const VarMap& params, const nn::Var& x, std::size_t t,
                         const nn::Var& context, const Injection* injection = nullptr, Trace* trace = nullptr);

}  // namespace painter::branch
