// Copyright (C) 2026 The Painter Authors
// SPDX-License-Identifier: Apache-2.0

#include "painter/branch.hpp"

#include <algorithm>
#include <cmath>

#include "painter/errors.hpp"

namespace painter::branch {

std::string to_string(TapSite site) {
    return site == TapSite::layer ? "layer" : "attention";
}

TapSite parse_tap_site(const std::string& text) {
    if (text == "layer") {
        return TapSite::layer;
    }
    if (text == "attention") {
        return TapSite::attention;
    }
    throw DomainError("unknown tap site '" + text + "'");
}

std::string ControlPointTap::weight_name() const {
    return "tap." + to_string(site) + std::to_string(index) + ".w";
}

std::string ControlPointTap::bias_name() const {
    return "tap." + to_string(site) + std::to_string(index) + ".b";
}

std::vector<ControlPointTap> taps_for(const DenoiserSpec& spec) {
    std::vector<ControlPointTap> taps;
    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
        taps.push_back({TapSite::layer, i, spec.layers[i].width, spec.layer_input_width(i)});
    }
    for (std::size_t i : spec.attention_sites()) {
        taps.push_back({TapSite::attention, i, spec.layers[i].width, spec.layers[i].width});
    }
    return taps;
}

BranchModel init_branch(const DenoiserSpec& base_spec, const ParamSet& base_params) {
    check_params(base_spec, base_params);
    if (base_spec.in_channels != 4) {
        throw ShapeError("base denoiser must take a 4-channel latent");
    }
    BranchModel branch;
    branch.spec = base_spec;
    branch.spec.in_channels = kBranchInputChannels;
    branch.params = base_params;

    const nn::Tensor& stem = base_params.at("stem.w");
    const std::size_t out = stem.dim(0);
    const std::size_t k = stem.dim(2);
    nn::Tensor widened({out, kBranchInputChannels, k, k});
    for (std::size_t o = 0; o < out; ++o) {
        for (std::size_t c = 0; c < base_spec.in_channels; ++c) {
            for (std::size_t j = 0; j < k * k; ++j) {
                widened[(o * kBranchInputChannels + c) * k * k + j] = stem[(o * base_spec.in_channels + c) * k * k + j];
            }
        }
    }
    branch.params["stem.w"] = std::move(widened);

    branch.taps = taps_for(branch.spec);
    for (const auto& tap : branch.taps) {
        branch.tap_params.emplace(tap.weight_name(), nn::Tensor({tap.out_width, tap.in_width, 1, 1}));
        branch.tap_params.emplace(tap.bias_name(), nn::Tensor({tap.out_width}));
    }
    return branch;
}

void check_taps(const BranchModel& branch) {
    const auto expected = taps_for(branch.spec);
    for (const auto& tap : expected) {
        if (std::find(branch.taps.begin(), branch.taps.end(), tap) == branch.taps.end()) {
            throw MissingTapError("no " + to_string(tap.site) + " tap for layer " + std::to_string(tap.index));
        }
    }
    if (branch.taps.size() != expected.size()) {
        throw MissingTapError("tap list has entries the branch spec does not define");
    }
    for (const auto& tap : branch.taps) {
        const auto w = branch.tap_params.find(tap.weight_name());
        const auto b = branch.tap_params.find(tap.bias_name());
        if (w == branch.tap_params.end() || b == branch.tap_params.end()) {
            throw MissingTapError("tap parameters missing for " + tap.weight_name());
        }
        if (w->second.shape() != nn::Shape{tap.out_width, tap.in_width, 1, 1} ||
            b->second.shape() != nn::Shape{tap.out_width}) {
            throw ShapeError("tap parameters misshaped for " + tap.weight_name());
        }
    }
}

BranchInput BranchInput::make(const nn::Tensor& noisy_latent, const nn::Tensor& masked_latent, const SoftMask& mask) {
    if (noisy_latent.rank() != 3 || noisy_latent.dim(0) != 4 || !noisy_latent.same_shape(masked_latent)) {
        throw ShapeError("branch input expects two 4×h×w latents of equal shape");
    }
    const std::size_t h = noisy_latent.dim(1);
    const std::size_t w = noisy_latent.dim(2);
    if (mask.height() != h || mask.width() != w) {
        throw ShapeError("mask " + std::to_string(mask.height()) + "x" + std::to_string(mask.width()) +
                         " does not match latent " + std::to_string(h) + "x" + std::to_string(w));
    }
    const std::size_t plane = h * w;
    nn::Tensor stacked({kBranchInputChannels, h, w});
    std::copy_n(noisy_latent.data(), 4 * plane, stacked.data());
    std::copy_n(masked_latent.data(), 4 * plane, stacked.data() + 4 * plane);
    std::copy_n(mask.values().data(), plane, stacked.data() + 8 * plane);
    return {std::move(stacked)};
}

BranchVars make_vars(const BranchModel& branch, bool trainable) {
    return {to_vars(branch.params, trainable), to_vars(branch.tap_params, trainable)};
}

nn::Var tap_contribution(const ControlPointTap& tap, const VarMap& tap_vars, const nn::Var& feature, double w) {
    const auto weight = tap_vars.find(tap.weight_name());
    const auto bias = tap_vars.find(tap.bias_name());
    if (weight == tap_vars.end() || bias == tap_vars.end()) {
        throw MissingTapError("tap parameters missing for " + tap.weight_name());
    }
    return nn::scale(nn::conv2d(feature, weight->second, bias->second), w);
}

JointOutput forward_joint(const BaseModel& base, const BranchModel& branch, const BranchVars& vars,
                          const nn::Tensor& noisy_latent, const BranchInput& input, std::size_t t,
                          const nn::Tensor& context, const JointOptions& options) {
    if (!base.params) {
        throw ModelNotLoadedError("base parameters are not loaded");
    }
    if (options.w < 0.0) {
        throw DomainError("preservation scale must be nonnegative");
    }
    check_taps(branch);
    if (base.spec.layers != branch.spec.layers) {
        throw ShapeError("branch layout does not match the base");
    }
    const auto& in = input.stacked.shape();
    if (noisy_latent.rank() != 3 || in.size() != 3 || in[1] != noisy_latent.dim(1) || in[2] != noisy_latent.dim(2)) {
        throw ShapeError("branch input and noisy latent disagree spatially");
    }

    const nn::Var ctx = nn::constant(context);
    Trace trace;
    denoiser_forward(branch.spec, vars.branch, nn::constant(input.stacked), t, ctx, nullptr, &trace);

    const std::size_t n = base.spec.layers.size();
    Injection injection;
    injection.layer_inputs.assign(n, {});
    injection.attention.assign(n, {});
    injection.mode = options.mode;
    for (const auto& tap : branch.taps) {
        if (tap.site == TapSite::layer) {
            injection.layer_inputs[tap.index] = tap_contribution(tap, vars.taps, trace.layer_outputs[tap.index], options.w);
        } else {
            injection.attention[tap.index] =
                tap_contribution(tap, vars.taps, trace.attention_outputs[tap.index], options.w);
        }
    }
    const VarMap base_vars = to_vars(*base.params, false);
    JointOutput out;
    out.prediction = denoiser_forward(base.spec, base_vars, nn::constant(noisy_latent), t, ctx, &injection);
    out.branch_maps = std::move(trace.attention_maps);
    return out;
}

nn::Tensor forward_joint(const BaseModel& base, const BranchModel& branch, const nn::Tensor& noisy_latent,
                         const BranchInput& input, std::size_t t, const nn::Tensor& context, const JointOptions& options) {
    const auto vars = make_vars(branch, false);
    return forward_joint(base, branch, vars, noisy_latent, input, t, context, options).prediction.value();
}

nn::Tensor base_forward(const BaseModel& base, const nn::Tensor& noisy_latent, std::size_t t, const nn::Tensor& context) {
    if (!base.params) {
        throw ModelNotLoadedError("base parameters are not loaded");
    }
    const VarMap vars = to_vars(*base.params, false);
    return denoiser_forward(base.spec, vars, nn::constant(noisy_latent), t, nn::constant(context)).value();
}

std::vector<AttentionMap> capture_attention_maps(const BranchModel& branch, const BranchInput& input, std::size_t t,
                                                 const nn::Tensor& context) {
    if (branch.spec.attention_sites().empty()) {
        throw ShapeError("branch has no attention sites");
    }
    const VarMap vars = to_vars(branch.params, false);
    Trace trace;
    denoiser_forward(branch.spec, vars, nn::constant(input.stacked), t, nn::constant(context), nullptr, &trace);
    std::vector<AttentionMap> maps;
    for (auto& m : trace.attention_maps) {
        maps.push_back({m.layer, m.height, m.width, m.probs.value()});
    }
    return maps;
}

nn::Tensor attention_probs(const nn::Tensor& queries, const nn::Tensor& keys) {
    if (queries.rank() != 2 || keys.rank() != 2 || queries.dim(1) != keys.dim(1)) {
        throw ShapeError("attention_probs expects HW×d queries and L×d keys");
    }
    const double inv = 1.0 / std::sqrt(static_cast<double>(queries.dim(1)));
    const nn::Var logits = nn::scale(nn::matmul(nn::constant(queries), nn::transpose(nn::constant(keys))), inv);
    return nn::softmax_rows(logits).value();
}

}  // namespace painter::branch
