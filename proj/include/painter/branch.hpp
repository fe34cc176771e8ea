// Copyright (C) 2026 The Painter Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <string>
#include <vector>

#include "painter/denoiser.hpp"
#include "painter/raster.hpp"

namespace painter::branch {

inline constexpr std::size_t kBranchInputChannels = 9;

enum class TapSite { layer, attention };

std::string to_string(TapSite site);
TapSite parse_tap_site(const std::string& text);

/// A zero-initialized 1×1 projection carrying a branch feature into the base.
///
/// Layer taps read the branch output of layer i and add into the input of
/// base layer i; attention taps read the branch cross-attention output of
/// layer i and add at the base attention site i (pre or post, see
/// AttnInjection). The contribution is w·Z(feature).
struct ControlPointTap {
    TapSite site = TapSite::layer;
    std::size_t index = 0;
    std::size_t in_width = 0;   // branch feature channels
    std::size_t out_width = 0;  // base channels at the injection point

    std::string weight_name() const;
    std::string bias_name() const;

    bool operator==(const ControlPointTap&) const = default;
};

/// Frozen base denoiser. Parameters are shared read-only.
struct BaseModel {
    DenoiserSpec spec;
    std::shared_ptr<const ParamSet> params;
};

/// Trainable branch: a copy of the base with a 9-channel stem, plus taps.
struct BranchModel {
    DenoiserSpec spec;
    ParamSet params;
    std::vector<ControlPointTap> taps;
    ParamSet tap_params;
};

/// One tap per layer and per attention site of `spec`, in (layer..., attention...) order.
std::vector<ControlPointTap> taps_for(const DenoiserSpec& spec);

/// Copies base parameters into a branch whose stem accepts
/// [z_t (4), masked-image latent (4), mask (1)]; the five new stem input
/// channels and every tap projection start at zero.
/// Throws ShapeError when `base_params` do not match `base_spec`.
BranchModel init_branch(const DenoiserSpec& base_spec, const ParamSet& base_params);

/// Throws MissingTapError when the taps do not cover exactly the sites of
/// the branch spec, ShapeError when tap parameters are misshaped.
void check_taps(const BranchModel& branch);

/// Concatenated branch input, 9×h×w.
struct BranchInput {
    nn::Tensor stacked;

    static BranchInput make(const nn::Tensor& noisy_latent, const nn::Tensor& masked_latent, const SoftMask& mask);
};

struct BranchVars {
    VarMap branch;
    VarMap taps;
};

BranchVars make_vars(const BranchModel& branch, bool trainable);

/// w·Z(feature) for one tap.
nn::Var tap_contribution(const ControlPointTap& tap, const VarMap& tap_vars, const nn::Var& feature, double w);

struct JointOptions {
    double w = 1.0;
    AttnInjection mode = AttnInjection::post;
};

struct JointOutput {
    nn::Var prediction;
    std::vector<AttentionMapVar> branch_maps;
};

/// Runs the branch on the stacked input, then the frozen base on the noisy
/// latent with every tap's contribution injected. Returns the base noise
/// prediction and the branch's head-averaged attention maps.
JointOutput forward_joint(const BaseModel& base, const BranchModel& branch, const BranchVars& vars,
                          const nn::Tensor& noisy_latent, const BranchInput& input, std::size_t t,
                          const nn::Tensor& context, const JointOptions& options);

/// Inference convenience over constant parameters.
nn::Tensor forward_joint(const BaseModel& base, const BranchModel& branch, const nn::Tensor& noisy_latent,
                         const BranchInput& input, std::size_t t, const nn::Tensor& context, const JointOptions& options);

/// The base model alone.
nn::Tensor base_forward(const BaseModel& base, const nn::Tensor& noisy_latent, std::size_t t, const nn::Tensor& context);

/// Plain attention map: probs is (height·width)×L, head-averaged.
struct AttentionMap {
    std::size_t layer = 0;
    std::size_t height = 0;
    std::size_t width = 0;
    nn::Tensor probs;
};

/// Head-averaged softmax(Q Kᵀ / sqrt(d)) at every branch attention site.
std::vector<AttentionMap> capture_attention_maps(const BranchModel& branch, const BranchInput& input, std::size_t t,
                                                 const nn::Tensor& context);

/// Standalone attention probabilities for given queries (HW×d) and keys (L×d).
nn::Tensor attention_probs(const nn::Tensor& queries, const nn::Tensor& keys);

}  // namespace painter::branch
