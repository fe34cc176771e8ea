// Copyright (C) 2026 The Painter Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace painter {

/// Inclusive pixel rectangle.
struct Box {
    std::size_t y0 = 0;
    std::size_t x0 = 0;
    std::size_t y1 = 0;
    std::size_t x1 = 0;

    std::size_t height() const { return y1 - y0 + 1; }
    std::size_t width() const { return x1 - x0 + 1; }
    bool operator==(const Box&) const = default;
};

/// H×W raster with values in {0,1}; 1 marks the region to inpaint.
class BinaryMask {
public:
    BinaryMask() = default;
    BinaryMask(std::size_t height, std::size_t width, std::uint8_t fill = 0);
    BinaryMask(std::size_t height, std::size_t width, std::vector<std::uint8_t> pixels);

    std::size_t height() const { return m_height; }
    std::size_t width() const { return m_width; }
    std::size_t size() const { return m_pixels.size(); }

    std::uint8_t at(std::size_t y, std::size_t x) const { return m_pixels[y * m_width + x]; }
    void set(std::size_t y, std::size_t x, bool on) { m_pixels[y * m_width + x] = on ? 1 : 0; }

    const std::vector<std::uint8_t>& pixels() const { return m_pixels; }

    std::size_t count() const;
    bool empty() const { return count() == 0; }

    /// Bounding box of the nonzero pixels, nullopt when the mask is empty.
    std::optional<Box> bounding_box() const;

    /// True when every pixel set in `other` is also set here.
    bool contains(const BinaryMask& other) const;

    bool operator==(const BinaryMask&) const = default;

private:
    std::size_t m_height = 0;
    std::size_t m_width = 0;
    std::vector<std::uint8_t> m_pixels;
};

/// Real-valued mask with values in [0,1], e.g. an area-averaged downsample.
class SoftMask {
public:
    SoftMask() = default;
    SoftMask(std::size_t height, std::size_t width, double fill = 0.0);
    SoftMask(std::size_t height, std::size_t width, std::vector<double> values);

    std::size_t height() const { return m_height; }
    std::size_t width() const { return m_width; }
    std::size_t size() const { return m_values.size(); }

    double at(std::size_t y, std::size_t x) const { return m_values[y * m_width + x]; }
    double& at(std::size_t y, std::size_t x) { return m_values[y * m_width + x]; }

    const std::vector<double>& values() const { return m_values; }
    double mean() const;

    static SoftMask from_binary(const BinaryMask& mask);

    bool operator==(const SoftMask&) const = default;

private:
    std::size_t m_height = 0;
    std::size_t m_width = 0;
    std::vector<double> m_values;
};

/// Interleaved 8-bit RGB image.
class RgbImage {
public:
    RgbImage() = default;
    RgbImage(std::size_t height, std::size_t width, std::uint8_t fill = 0);
    RgbImage(std::size_t height, std::size_t width, std::vector<std::uint8_t> data);

    std::size_t height() const { return m_height; }
    std::size_t width() const { return m_width; }

    std::uint8_t at(std::size_t y, std::size_t x, std::size_t c) const { return m_data[(y * m_width + x) * 3 + c]; }
    std::uint8_t& at(std::size_t y, std::size_t x, std::size_t c) { return m_data[(y * m_width + x) * 3 + c]; }

    const std::vector<std::uint8_t>& data() const { return m_data; }

    RgbImage crop(const Box& box) const;

    bool operator==(const RgbImage&) const = default;

private:
    std::size_t m_height = 0;
    std::size_t m_width = 0;
    std::vector<std::uint8_t> m_data;
};

/// Expands `box` by `pad_frac` of its side length on every side, clipped to the frame.
Box pad_box(const Box& box, double pad_frac, std::size_t height, std::size_t width);

}  // namespace painter
