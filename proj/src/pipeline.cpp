// Copyright (C) 2026 The Painter Authors
// SPDX-License-Identifier: Apache-2.0

#include "painter/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <random>

#include "painter/errors.hpp"
#include "painter/maskgen.hpp"

namespace painter::pipeline {

namespace {

std::size_t round_up(std::size_t v, std::size_t m) {
    return (v + m - 1) / m * m;
}

RgbImage pad_edge(const RgbImage& image, std::size_t h, std::size_t w) {
    RgbImage out(h, w);
    for (std::size_t y = 0; y < h; ++y) {
        const std::size_t sy = std::min(y, image.height() - 1);
        for (std::size_t x = 0; x < w; ++x) {
            const std::size_t sx = std::min(x, image.width() - 1);
            for (std::size_t c = 0; c < 3; ++c) {
                out.at(y, x, c) = image.at(sy, sx, c);
            }
        }
    }
    return out;
}

BinaryMask pad_zero(const BinaryMask& mask, std::size_t h, std::size_t w) {
    BinaryMask out(h, w);
    for (std::size_t y = 0; y < mask.height(); ++y) {
        for (std::size_t x = 0; x < mask.width(); ++x) {
            out.set(y, x, mask.at(y, x));
        }
    }
    return out;
}

nn::Tensor blend_latent(const nn::Tensor& z, const nn::Tensor& known, const SoftMask& m) {
    nn::Tensor out = z;
    const std::size_t plane = m.size();
    for (std::size_t c = 0; c < z.dim(0); ++c) {
        for (std::size_t p = 0; p < plane; ++p) {
            const double a = m.values()[p];
            out[c * plane + p] = a * z[c * plane + p] + (1.0 - a) * known[c * plane + p];
        }
    }
    return out;
}

}  // namespace

void InpaintRequest::validate() const {
    if (image.height() == 0 || image.width() == 0) {
        throw ShapeError("empty image");
    }
    if (mask.height() != image.height() || mask.width() != image.width()) {
        throw ShapeError("mask and image sizes differ");
    }
    if (steps == 0) {
        throw DomainError("steps must be at least 1");
    }
    if (!(guidance >= 0.0)) {
        throw DomainError("guidance must be nonnegative");
    }
    if (w && !(*w >= 0.0)) {
        throw DomainError("preservation scale must be nonnegative");
    }
}

RgbImage blend_preserve(const RgbImage& generated, const RgbImage& original, const BinaryMask& mask) {
    if (generated.height() != original.height() || generated.width() != original.width() ||
        mask.height() != original.height() || mask.width() != original.width()) {
        throw ShapeError("blend inputs differ in size");
    }
    RgbImage out = original;
    for (std::size_t y = 0; y < out.height(); ++y) {
        for (std::size_t x = 0; x < out.width(); ++x) {
            if (mask.at(y, x)) {
                for (std::size_t c = 0; c < 3; ++c) {
                    out.at(y, x, c) = generated.at(y, x, c);
                }
            }
        }
    }
    return out;
}

PainterPipeline::PainterPipeline(std::shared_ptr<const model::PainterModel> model) : m_model(std::move(model)) {}

const model::PainterModel& PainterPipeline::model() const {
    if (!m_model) {
        throw ModelNotLoadedError("no model attached to the pipeline");
    }
    return *m_model;
}

InpaintResult PainterPipeline::inpaint(const InpaintRequest& request) const {
    const auto start = std::chrono::steady_clock::now();
    const auto& mdl = model();
    request.validate();

    InpaintSettings settings{request.prompt,   request.negative_prompt, request.steps,
                             request.guidance, request.w.value_or(mdl.config().w_default), request.seed};

    std::size_t grid = mdl.codec().factor();
    for (const auto& layer : mdl.base().spec.layers) {
        grid = std::max(grid, mdl.codec().factor() * layer.scale);
    }
    const std::size_t ph = round_up(request.image.height(), grid);
    const std::size_t pw = round_up(request.image.width(), grid);
    const RgbImage image = pad_edge(request.image, ph, pw);
    const BinaryMask mask = pad_zero(request.mask, ph, pw);

    const nn::Tensor pixels = adapters::image_to_tensor(image);
    nn::Tensor masked = pixels;
    const std::size_t plane = mask.size();
    for (std::size_t p = 0; p < plane; ++p) {
        if (mask.pixels()[p]) {
            for (std::size_t c = 0; c < 3; ++c) {
                masked[c * plane + p] = 0.0;
            }
        }
    }
    const nn::Tensor z0 = mdl.codec().encode(pixels);
    const nn::Tensor z0m = mdl.codec().encode(masked);
    const SoftMask m = maskgen::resize_mask(mask, z0.dim(1), z0.dim(2));

    const auto& text = mdl.text_encoder();
    const auto cond_tokens = text.tokenizer().tokenize(request.prompt);
    const bool conditional = cond_tokens.actual_len > 2;
    const nn::Tensor cond = text.encode(cond_tokens);
    const nn::Tensor uncond = text.encode(request.negative_prompt);

    std::mt19937_64 rng(request.seed);
    const nn::Tensor noise = nn::Tensor::randn(z0.shape(), rng);
    const auto& sched = mdl.schedule();
    const auto timesteps = trainer::sampling_timesteps(sched.steps(), request.steps);
    const branch::JointOptions options{settings.w, mdl.config().injection};

    nn::Tensor z = noise;
    for (std::size_t i = 0; i < timesteps.size(); ++i) {
        const std::size_t t = timesteps[i];
        const std::size_t t_next = i + 1 < timesteps.size() ? timesteps[i + 1] : 0;
        const auto input = branch::BranchInput::make(z, z0m, m);
        nn::Tensor eps = branch::forward_joint(mdl.base(), mdl.branch(), z, input, t, uncond, options);
        if (conditional) {
            const nn::Tensor eps_c = branch::forward_joint(mdl.base(), mdl.branch(), z, input, t, cond, options);
            for (std::size_t k = 0; k < eps.numel(); ++k) {
                eps[k] = eps[k] + request.guidance * (eps_c[k] - eps[k]);
            }
        }
        const double a = sched.alpha(t);
        const double s = sched.sigma(t);
        const double a_next = t_next ? sched.alpha(t_next) : 1.0;
        const double s_next = t_next ? sched.sigma(t_next) : 0.0;
        for (std::size_t k = 0; k < z.numel(); ++k) {
            const double x0 = (z[k] - s * eps[k]) / a;
            z[k] = a_next * x0 + s_next * eps[k];
        }
        z = blend_latent(z, t_next ? trainer::add_noise(z0, t_next, noise, sched) : z0, m);
    }

    const RgbImage decoded = adapters::tensor_to_image(mdl.codec().decode(z));
    const RgbImage generated = ph == request.image.height() && pw == request.image.width()
                                   ? decoded
                                   : decoded.crop({0, 0, request.image.height() - 1, request.image.width() - 1});
    InpaintResult result;
    result.image = blend_preserve(generated, request.image, request.mask);
    result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.settings = std::move(settings);
    return result;
}

InpaintResult IdentityInpainter::inpaint(const InpaintRequest& request) const {
    request.validate();
    return {request.image, 0.0,
            {request.prompt, request.negative_prompt, request.steps, request.guidance, request.w.value_or(1.0),
             request.seed}};
}

}  // namespace painter::pipeline
