// Copyright (C) 2026 The Painter Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "painter/raster.hpp"

namespace painter::synthetic {

struct NamedColor {
    const char* name;
    std::uint8_t r, g, b;
};

/// Palette shared by the synthetic scenes and the offline color captioner.
const std::vector<NamedColor>& palette();

/// One flat-colored object on a smooth two-tone background.
struct Scene {
    std::string id;
    RgbImage image;
    BinaryMask seg_mask;
    std::string prompt;    // e.g. "a red disk"
    std::string category;
};

/// `count` scenes of height×width, ids "scene-0000"... Pure in `seed`.
std::vector<Scene> make_scenes(std::size_t count, std::size_t height, std::size_t width, std::uint64_t seed);

}  // namespace painter::synthetic
