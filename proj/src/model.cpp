// Copyright (C) 2026 The Painter Authors
// SPDX-License-Identifier: Apache-2.0

#include "painter/model.hpp"

#include "painter/checkpoint.hpp"
#include "painter/errors.hpp"

namespace painter::model {

ModelConfig preset_config(const std::string& name, const std::filesystem::path& base_path) {
    ModelConfig config;
    config.preset = name;
    if (name == "toy") {
        config.spec = branch::DenoiserSpec::toy(config.text.length);
        config.text.dim = config.spec.text_dim;
        config.schedule.steps = 50;
        if (!base_path.empty()) {
            config.base = {BaseRef::Kind::path, 0, base_path};
        }
        return config;
    }
    if (name == "sd15-adapter") {
        if (base_path.empty()) {
            throw ModelNotLoadedError("preset 'sd15-adapter' needs a base directory");
        }
        config.text.dim = 768;
        config.schedule.steps = 1000;
        config.base = {BaseRef::Kind::path, 0, base_path};
        // The denoiser spec comes from the base directory; see resolve_base.
        return config;
    }
    throw DomainError("unknown preset '" + name + "'");
}

PainterModel::PainterModel(ModelConfig config, branch::BaseModel base, branch::BranchModel branch)
    : m_config(std::move(config)),
      m_base(std::move(base)),
      m_branch(std::move(branch)),
      m_text(m_config.text),
      m_codec(m_config.codec_factor),
      m_schedule(trainer::NoiseSchedule::scaled_linear(m_config.schedule.steps, m_config.schedule.beta_start,
                                                       m_config.schedule.beta_end)) {
    if (!m_base.params) {
        throw ModelNotLoadedError("base parameters missing");
    }
    if (m_base.spec.text_dim != m_config.text.dim || m_base.spec.token_length != m_config.text.length) {
        throw ShapeError("text encoder does not match the denoiser context shape");
    }
    check_params(m_base.spec, *m_base.params);
    check_params(m_branch.spec, m_branch.params);
    check_taps(m_branch);
    if (m_config.w_default < 0.0) {
        throw DomainError("preservation scale must be nonnegative");
    }
    m_config.spec = m_base.spec;
}

branch::BaseModel resolve_base(const ModelConfig& config) {
    if (config.base.kind == BaseRef::Kind::path) {
        return ckpt::load_base(config.base.path);
    }
    config.spec.validate();
    return {config.spec, std::make_shared<const branch::ParamSet>(branch::init_params(config.spec, config.base.seed))};
}

PainterModel build_model(const ModelConfig& config) {
    auto base = resolve_base(config);
    auto branch = branch::init_branch(base.spec, *base.params);
    return PainterModel(config, std::move(base), std::move(branch));
}

}  // namespace painter::model
