// Copyright (C) 2026 The Painter Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>

#include "painter/denoiser.hpp"
#include "painter/model.hpp"

namespace painter::ckpt {

// params.bin: "PNTRPRM1", u32 tensor count, then per tensor (sorted by name)
// u32 name length, name bytes, u32 rank, u64 dims, f64 values. Little endian.
void save_params(const std::filesystem::path& path, const branch::ParamSet& params);
branch::ParamSet load_params(const std::filesystem::path& path);

/// Hex SHA-256 over names, shapes and raw values.
std::string params_digest(const branch::ParamSet& params);

/// Base directory: base.json (spec) + params.bin.
void save_base(const std::filesystem::path& dir, const branch::BaseModel& base);
branch::BaseModel load_base(const std::filesystem::path& dir);

/// Checkpoint directory: painter.json (config, taps, base digest) + params.bin
/// holding branch tensors under "branch." and tap tensors under their own names.
void save_checkpoint(const std::filesystem::path& dir, const model::PainterModel& model);

/// Throws SchemaError when the stored spec, taps or base digest disagree.
model::PainterModel load_checkpoint(const std::filesystem::path& dir);

}  // namespace painter::ckpt
