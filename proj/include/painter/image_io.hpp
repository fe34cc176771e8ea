// Copyright (C) 2026 The Painter Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "painter/raster.hpp"

namespace painter::io {

using Bytes = std::vector<std::uint8_t>;

// PNG codecs. Masks are 8-bit grayscale with 0 = keep and 255 = inpaint;
// on decode any value >= 128 is read as inpaint. RGB decode accepts
// gray, palette and alpha inputs and drops alpha.
Bytes encode_png(const RgbImage& image);
Bytes encode_png(const BinaryMask& mask);
RgbImage decode_png_rgb(const Bytes& png);
BinaryMask decode_png_mask(const Bytes& png);

RgbImage read_png_rgb(const std::filesystem::path& path);
BinaryMask read_png_mask(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const RgbImage& image);
void write_png(const std::filesystem::path& path, const BinaryMask& mask);

Bytes read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const Bytes& bytes);
void write_file(const std::filesystem::path& path, std::string_view text);

std::string base64_encode(const Bytes& bytes);
Bytes base64_decode(std::string_view text);

}  // namespace painter::io
