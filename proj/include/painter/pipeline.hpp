// Copyright (C) 2026 The Painter Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "painter/model.hpp"
#include "painter/raster.hpp"

namespace painter::pipeline {

struct InpaintRequest {
    RgbImage image;
    BinaryMask mask;
    std::string prompt;
    std::string negative_prompt;
    std::size_t steps = 50;
    double guidance = 7.5;
    std::optional<double> w;  // model default when unset
    std::uint64_t seed = 0;

    /// Throws ShapeError on size mismatch, DomainError on bad settings.
    void validate() const;
};

/// Settings actually used, echoed back with the result.
struct InpaintSettings {
    std::string prompt;
    std::string negative_prompt;
    std::size_t steps = 0;
    double guidance = 0.0;
    double w = 0.0;
    std::uint64_t seed = 0;
};

struct InpaintResult {
    RgbImage image;
    double seconds = 0.0;
    InpaintSettings settings;
};

class Inpainter {
public:
    virtual ~Inpainter() = default;
    virtual InpaintResult inpaint(const InpaintRequest& request) const = 0;
    virtual std::string name() const = 0;
};

/// Deterministic noise-prediction sampler over the joint model.
///
/// Each step runs forward_joint on the prompt and on the negative prompt and
/// combines them as uncond + g·(cond − uncond); prompts without content
/// tokens run the unconditional path only. After every step the latent
/// outside the hole is replaced by the clean latent noised to the next
/// timestep. Images whose sides are not multiples of the latent grid are
/// edge-padded for sampling and cropped back.
class PainterPipeline final : public Inpainter {
public:
    explicit PainterPipeline(std::shared_ptr<const model::PainterModel> model);

    InpaintResult inpaint(const InpaintRequest& request) const override;
    std::string name() const override { return "painter"; }
    const model::PainterModel& model() const;

private:
    std::shared_ptr<const model::PainterModel> m_model;
};

/// Returns the input image untouched.
class IdentityInpainter final : public Inpainter {
public:
    InpaintResult inpaint(const InpaintRequest& request) const override;
    std::string name() const override { return "identity"; }
};

/// out = m·generated + (1−m)·original per pixel and channel.
RgbImage blend_preserve(const RgbImage& generated, const RgbImage& original, const BinaryMask& mask);

}  // namespace painter::pipeline
