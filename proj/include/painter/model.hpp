// Copyright (C) 2026 The Painter Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "painter/adapters.hpp"
#include "painter/branch.hpp"
#include "painter/schedule.hpp"

namespace painter::model {

inline constexpr std::uint64_t kToyBaseSeed = 0xba5e;

/// Where the frozen base comes from: regenerated from a seed, or a base
/// directory written by ckpt::save_base. Bases are referenced, never copied.
struct BaseRef {
    enum class Kind { seed, path };
    Kind kind = Kind::seed;
    std::uint64_t seed = kToyBaseSeed;
    std::filesystem::path path;
};

struct ScheduleConfig {
    std::size_t steps = 50;
    double beta_start = 0.00085;
    double beta_end = 0.012;
};

/// Everything needed to rebuild a model except trained weights.
struct ModelConfig {
    std::string preset = "toy";
    branch::DenoiserSpec spec = branch::DenoiserSpec::toy();
    adapters::TextEncoderConfig text;
    std::size_t codec_factor = 8;
    ScheduleConfig schedule;
    double w_default = 1.0;
    branch::AttnInjection injection = branch::AttnInjection::post;
    BaseRef base;
};

/// "toy": 4×16×16 latent (128×128 images), T = 50, seeded base.
/// "sd15-adapter": T = 1000, 768-wide text context; needs `base_path`.
/// Throws DomainError for unknown names and ModelNotLoadedError when a
/// path-based preset is requested without a path.
ModelConfig preset_config(const std::string& name, const std::filesystem::path& base_path = {});

class PainterModel {
public:
    PainterModel(ModelConfig config, branch::BaseModel base, branch::BranchModel branch);

    const ModelConfig& config() const { return m_config; }
    const branch::BaseModel& base() const { return m_base; }
    const branch::BranchModel& branch() const { return m_branch; }
    branch::BranchModel& branch() { return m_branch; }
    const adapters::TextEncoder& text_encoder() const { return m_text; }
    const adapters::LatentCodec& codec() const { return m_codec; }
    const trainer::NoiseSchedule& schedule() const { return m_schedule; }

    /// Image size matching the latent grid.
    std::size_t image_height() const { return m_config.spec.latent_height * m_codec.factor(); }
    std::size_t image_width() const { return m_config.spec.latent_width * m_codec.factor(); }

private:
    ModelConfig m_config;
    branch::BaseModel m_base;
    branch::BranchModel m_branch;
    adapters::TextEncoder m_text;
    adapters::LatentCodec m_codec;
    trainer::NoiseSchedule m_schedule;
};

/// Resolves the base and attaches a freshly initialized branch.
PainterModel build_model(const ModelConfig& config);

/// Resolves only the base of `config` (seeded or from disk).
branch::BaseModel resolve_base(const ModelConfig& config);

}  // namespace painter::model
