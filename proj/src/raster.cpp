// Copyright (C) 2026 The Painter Authors
// SPDX-License-Identifier: Apache-2.0

#include "painter/raster.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "painter/errors.hpp"

namespace painter {

BinaryMask::BinaryMask(std::size_t height, std::size_t width, std::uint8_t fill)
    : m_height(height), m_width(width), m_pixels(height * width, fill ? 1 : 0) {
    if (height == 0 || width == 0) {
        throw ShapeError("mask dimensions must be at least 1x1");
    }
}

BinaryMask::BinaryMask(std::size_t height, std::size_t width, std::vector<std::uint8_t> pixels)
    : m_height(height), m_width(width), m_pixels(std::move(pixels)) {
    if (height == 0 || width == 0) {
        throw ShapeError("mask dimensions must be at least 1x1");
    }
    if (m_pixels.size() != height * width) {
        throw ShapeError("mask pixel count does not match its dimensions");
    }
    for (auto p : m_pixels) {
        if (p > 1) {
            throw DomainError("mask values must be 0 or 1");
        }
    }
}

std::size_t BinaryMask::count() const {
    return static_cast<std::size_t>(std::count(m_pixels.begin(), m_pixels.end(), std::uint8_t{1}));
}

std::optional<Box> BinaryMask::bounding_box() const {
    std::optional<Box> box;
    for (std::size_t y = 0; y < m_height; ++y) {
        for (std::size_t x = 0; x < m_width; ++x) {
            if (!at(y, x)) {
                continue;
            }
            if (!box) {
                box = Box{y, x, y, x};
            } else {
                box->y0 = std::min(box->y0, y);
                box->x0 = std::min(box->x0, x);
                box->y1 = std::max(box->y1, y);
                box->x1 = std::max(box->x1, x);
            }
        }
    }
    return box;
}

bool BinaryMask::contains(const BinaryMask& other) const {
    if (other.m_height != m_height || other.m_width != m_width) {
        throw ShapeError("mask dimensions differ");
    }
    for (std::size_t i = 0; i < m_pixels.size(); ++i) {
        if (other.m_pixels[i] && !m_pixels[i]) {
            return false;
        }
    }
    return true;
}

SoftMask::SoftMask(std::size_t height, std::size_t width, double fill)
    : m_height(height), m_width(width), m_values(height * width, fill) {
    if (height == 0 || width == 0) {
        throw ShapeError("mask dimensions must be at least 1x1");
    }
}

SoftMask::SoftMask(std::size_t height, std::size_t width, std::vector<double> values)
    : m_height(height), m_width(width), m_values(std::move(values)) {
    if (height == 0 || width == 0 || m_values.size() != height * width) {
        throw ShapeError("soft mask dimensions do not match its values");
    }
    for (double v : m_values) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw DomainError("soft mask values must lie in [0,1]");
        }
    }
}

double SoftMask::mean() const {
    return std::accumulate(m_values.begin(), m_values.end(), 0.0) / static_cast<double>(m_values.size());
}

SoftMask SoftMask::from_binary(const BinaryMask& mask) {
    std::vector<double> values(mask.pixels().begin(), mask.pixels().end());
    return SoftMask(mask.height(), mask.width(), std::move(values));
}

RgbImage::RgbImage(std::size_t height, std::size_t width, std::uint8_t fill)
    : m_height(height), m_width(width), m_data(height * width * 3, fill) {
    if (height == 0 || width == 0) {
        throw ShapeError("image dimensions must be at least 1x1");
    }
}

RgbImage::RgbImage(std::size_t height, std::size_t width, std::vector<std::uint8_t> data)
    : m_height(height), m_width(width), m_data(std::move(data)) {
    if (height == 0 || width == 0 || m_data.size() != height * width * 3) {
        throw ShapeError("image dimensions do not match its data");
    }
}

RgbImage RgbImage::crop(const Box& box) const {
    if (box.y1 >= m_height || box.x1 >= m_width || box.y0 > box.y1 || box.x0 > box.x1) {
        throw ShapeError("crop box outside image");
    }
    RgbImage out(box.height(), box.width());
    for (std::size_t y = 0; y < box.height(); ++y) {
        const auto* src = &m_data[((box.y0 + y) * m_width + box.x0) * 3];
        std::copy(src, src + box.width() * 3, &out.m_data[y * box.width() * 3]);
    }
    return out;
}

Box pad_box(const Box& box, double pad_frac, std::size_t height, std::size_t width) {
    if (pad_frac < 0.0) {
        throw DomainError("padding fraction must be nonnegative");
    }
    const auto pad_y = static_cast<std::size_t>(std::lround(pad_frac * static_cast<double>(box.height())));
    const auto pad_x = static_cast<std::size_t>(std::lround(pad_frac * static_cast<double>(box.width())));
    Box out;
    out.y0 = box.y0 >= pad_y ? box.y0 - pad_y : 0;
    out.x0 = box.x0 >= pad_x ? box.x0 - pad_x : 0;
    out.y1 = std::min(height - 1, box.y1 + pad_y);
    out.x1 = std::min(width - 1, box.x1 + pad_x);
    return out;
}

}  // namespace painter
