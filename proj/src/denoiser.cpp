// Copyright (C) 2026 The Painter Authors
// SPDX-License-Identifier: Apache-2.0

#include "painter/denoiser.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "painter/errors.hpp"

namespace painter::branch {

namespace {

bool is_power_of_two(std::size_t v) {
    return v != 0 && (v & (v - 1)) == 0;
}

std::string layer_key(std::size_t i, const char* name) {
    return "layer" + std::to_string(i) + "." + name;
}

const nn::Var& lookup(const VarMap& params, const std::string& name) {
    auto it = params.find(name);
    if (it == params.end()) {
        throw ShapeError("missing parameter '" + name + "'");
    }
    return it->second;
}

nn::Var resample(nn::Var x, std::size_t from_scale, std::size_t to_scale) {
    while (from_scale < to_scale) {
        x = nn::avg_pool2(x);
        from_scale *= 2;
    }
    while (from_scale > to_scale) {
        x = nn::upsample2(x);
        from_scale /= 2;
    }
    return x;
}

nn::Var conv(const VarMap& p, const std::string& prefix, const nn::Var& x) {
    return nn::conv2d(x, lookup(p, prefix + ".w"), lookup(p, prefix + ".b"));
}

}  // namespace

void DenoiserSpec::validate() const {
    if (layers.empty()) {
        throw ShapeError("denoiser needs at least one layer");
    }
    if (in_channels == 0 || out_channels == 0 || stem_width == 0 || heads == 0 || head_dim == 0 || text_dim == 0 ||
        token_length == 0 || time_dim == 0 || time_dim % 2 != 0) {
        throw ShapeError("denoiser dimensions must be positive (time_dim even)");
    }
    for (const auto& layer : layers) {
        if (layer.width == 0 || !is_power_of_two(layer.scale)) {
            throw ShapeError("layer widths must be positive and scales powers of two");
        }
        if (latent_height % layer.scale || latent_width % layer.scale) {
            throw ShapeError("latent shape is not divisible by a layer scale");
        }
    }
}

std::vector<std::size_t> DenoiserSpec::attention_sites() const {
    std::vector<std::size_t> sites;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        if (layers[i].attention) {
            sites.push_back(i);
        }
    }
    return sites;
}

std::size_t DenoiserSpec::layer_input_width(std::size_t i) const {
    return i == 0 ? stem_width : layers.at(i - 1).width;
}

DenoiserSpec DenoiserSpec::toy(std::size_t token_length) {
    DenoiserSpec spec;
    spec.layers = {{32, 1, false}, {32, 2, false}, {32, 2, true}, {32, 1, false}};
    spec.token_length = token_length;
    return spec;
}

std::vector<std::pair<std::string, nn::Shape>> param_shapes(const DenoiserSpec& spec) {
    spec.validate();
    std::vector<std::pair<std::string, nn::Shape>> shapes;
    shapes.emplace_back("stem.w", nn::Shape{spec.stem_width, spec.in_channels, 3, 3});
    shapes.emplace_back("stem.b", nn::Shape{spec.stem_width});
    const std::size_t hd = spec.heads * spec.head_dim;
    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
        const std::size_t in = spec.layer_input_width(i);
        const std::size_t w = spec.layers[i].width;
        shapes.emplace_back(layer_key(i, "conv1.w"), nn::Shape{w, in, 3, 3});
        shapes.emplace_back(layer_key(i, "conv1.b"), nn::Shape{w});
        shapes.emplace_back(layer_key(i, "conv2.w"), nn::Shape{w, w, 3, 3});
        shapes.emplace_back(layer_key(i, "conv2.b"), nn::Shape{w});
        shapes.emplace_back(layer_key(i, "time.w"), nn::Shape{w, spec.time_dim});
        shapes.emplace_back(layer_key(i, "time.b"), nn::Shape{w});
        if (in != w) {
            shapes.emplace_back(layer_key(i, "skip.w"), nn::Shape{w, in, 1, 1});
            shapes.emplace_back(layer_key(i, "skip.b"), nn::Shape{w});
        }
        if (spec.layers[i].attention) {
            shapes.emplace_back(layer_key(i, "attn.q"), nn::Shape{hd, w});
            shapes.emplace_back(layer_key(i, "attn.k"), nn::Shape{hd, spec.text_dim});
            shapes.emplace_back(layer_key(i, "attn.v"), nn::Shape{hd, spec.text_dim});
            shapes.emplace_back(layer_key(i, "attn.o"), nn::Shape{w, hd});
            shapes.emplace_back(layer_key(i, "attn.ob"), nn::Shape{w});
        }
    }
    shapes.emplace_back("out.w", nn::Shape{spec.out_channels, spec.layers.back().width, 3, 3});
    shapes.emplace_back("out.b", nn::Shape{spec.out_channels});
    std::sort(shapes.begin(), shapes.end());
    return shapes;
}

ParamSet init_params(const DenoiserSpec& spec, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    ParamSet params;
    for (const auto& [name, shape] : param_shapes(spec)) {
        if (shape.size() == 1) {
            params.emplace(name, nn::Tensor(shape));
            continue;
        }
        std::size_t fan_in = 1;
        for (std::size_t d = 1; d < shape.size(); ++d) {
            fan_in *= shape[d];
        }
        params.emplace(name, nn::Tensor::randn(shape, rng, 1.0 / std::sqrt(static_cast<double>(fan_in))));
    }
    return params;
}

void check_params(const DenoiserSpec& spec, const ParamSet& params) {
    const auto shapes = param_shapes(spec);
    for (const auto& [name, shape] : shapes) {
        auto it = params.find(name);
        if (it == params.end()) {
            throw ShapeError("parameters lack '" + name + "'");
        }
        if (it->second.shape() != shape) {
            throw ShapeError("parameter '" + name + "' has shape " + nn::shape_string(it->second.shape()) +
                             ", spec expects " + nn::shape_string(shape));
        }
    }
    if (params.size() != shapes.size()) {
        for (const auto& [name, tensor] : params) {
            const bool known = std::any_of(shapes.begin(), shapes.end(), [&](const auto& s) { return s.first == name; });
            if (!known) {
                throw ShapeError("unexpected parameter '" + name + "'");
            }
        }
    }
}

std::size_t param_count(const ParamSet& params) {
    std::size_t total = 0;
    for (const auto& [name, tensor] : params) {
        total += tensor.numel();
    }
    return total;
}

VarMap to_vars(const ParamSet& params, bool trainable) {
    VarMap vars;
    for (const auto& [name, tensor] : params) {
        vars.emplace(name, trainable ? nn::parameter(tensor) : nn::constant(tensor));
    }
    return vars;
}

nn::Tensor timestep_embedding(std::size_t t, std::size_t dim) {
    nn::Tensor out({dim});
    const std::size_t half = dim / 2;
    for (std::size_t k = 0; k < half; ++k) {
        const double freq = std::exp(-std::log(10000.0) * static_cast<double>(k) / static_cast<double>(half));
        out[k] = std::sin(static_cast<double>(t) * freq);
        out[half + k] = std::cos(static_cast<double>(t) * freq);
    }
    return out;
}

nn::Var denoiser_forward(const DenoiserSpec& spec, const VarMap& p, const nn::Var& x, std::size_t t,
                         const nn::Var& context, const Injection* injection, Trace* trace) {
    const auto& xs = x.value().shape();
    if (xs.size() != 3 || xs[0] != spec.in_channels) {
        throw ShapeError("denoiser input " + nn::shape_string(xs) + " does not have " +
                         std::to_string(spec.in_channels) + " channels");
    }
    const std::size_t n = spec.layers.size();
    for (const auto& layer : spec.layers) {
        if (xs[1] % layer.scale || xs[2] % layer.scale) {
            throw ShapeError("latent " + nn::shape_string(xs) + " is not divisible by layer scale " +
                             std::to_string(layer.scale));
        }
    }
    const auto& cs = context.value().shape();
    if (cs.size() != 2 || cs[0] != spec.token_length || cs[1] != spec.text_dim) {
        throw ShapeError("text context " + nn::shape_string(cs) + " does not match L×dim = " +
                         std::to_string(spec.token_length) + "x" + std::to_string(spec.text_dim));
    }
    if (injection && (injection->layer_inputs.size() != n || injection->attention.size() != n)) {
        throw ShapeError("injection lists must have one entry per layer");
    }
    if (trace) {
        trace->layer_outputs.assign(n, {});
        trace->attention_outputs.assign(n, {});
        trace->attention_maps.clear();
    }

    const nn::Var temb = nn::constant(timestep_embedding(t, spec.time_dim).reshaped({spec.time_dim, 1}));
    const nn::Var context_t = nn::transpose(context);
    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(spec.head_dim));

    nn::Var h = conv(p, "stem", x);
    std::size_t scale = 1;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& layer = spec.layers[i];
        h = resample(h, scale, layer.scale);
        scale = layer.scale;
        if (injection && injection->layer_inputs[i]) {
            h = nn::add(h, injection->layer_inputs[i]);
        }

        const nn::Var time_bias = nn::add(
            nn::reshape(nn::matmul(lookup(p, layer_key(i, "time.w")), temb), {layer.width}),
            lookup(p, layer_key(i, "time.b")));
        nn::Var r = conv(p, layer_key(i, "conv1"), nn::silu(h));
        r = nn::add_channel_bias(r, time_bias);
        r = conv(p, layer_key(i, "conv2"), nn::silu(r));
        const nn::Var skip = spec.layer_input_width(i) == layer.width ? h : conv(p, layer_key(i, "skip"), h);
        h = nn::add(skip, r);

        if (layer.attention) {
            const std::size_t hh = h.shape()[1];
            const std::size_t ww = h.shape()[2];
            nn::Var attn_in = h;
            if (injection && injection->mode == AttnInjection::pre && injection->attention[i]) {
                attn_in = nn::add(attn_in, injection->attention[i]);
            }
            const nn::Var tokens = nn::reshape(attn_in, {layer.width, hh * ww});
            const nn::Var q = nn::matmul(lookup(p, layer_key(i, "attn.q")), tokens);
            const nn::Var k = nn::matmul(lookup(p, layer_key(i, "attn.k")), context_t);
            const nn::Var v = nn::matmul(lookup(p, layer_key(i, "attn.v")), context_t);
            std::vector<nn::Var> head_out;
            std::vector<nn::Var> head_probs;
            for (std::size_t head = 0; head < spec.heads; ++head) {
                const std::size_t off = head * spec.head_dim;
                const nn::Var qh = nn::slice_rows(q, off, spec.head_dim);
                const nn::Var kh = nn::slice_rows(k, off, spec.head_dim);
                const nn::Var vh = nn::slice_rows(v, off, spec.head_dim);
                const nn::Var probs = nn::softmax_rows(nn::scale(nn::matmul(nn::transpose(qh), kh), inv_sqrt_d));
                head_probs.push_back(probs);
                head_out.push_back(nn::matmul(vh, nn::transpose(probs)));
            }
            const nn::Var mixed = spec.heads == 1 ? head_out.front() : nn::concat_rows(head_out);
            nn::Var out = nn::add_channel_bias(nn::matmul(lookup(p, layer_key(i, "attn.o")), mixed),
                                               lookup(p, layer_key(i, "attn.ob")));
            out = nn::reshape(out, {layer.width, hh, ww});
            if (injection && injection->mode == AttnInjection::post && injection->attention[i]) {
                out = nn::add(out, injection->attention[i]);
            }
            if (trace) {
                trace->attention_outputs[i] = out;
                trace->attention_maps.push_back(
                    {i, hh, ww, spec.heads == 1 ? head_probs.front() : nn::mean_of(head_probs)});
            }
            h = nn::add(h, out);
        }
        if (trace) {
            trace->layer_outputs[i] = h;
        }
    }
    h = resample(h, scale, 1);
    return conv(p, "out", nn::silu(h));
}

}  // namespace painter::branch
