// Copyright (C) 2026 The Painter Authors
// SPDX-License-Identifier: Apache-2.0

// Shared generators for unit and acceptance tests.

#pragma once

#include <cmath>
#include <random>

#include "painter/raster.hpp"

namespace painter::testing {

/// Union of 1 to 3 random filled ellipses; never empty.
inline BinaryMask random_blob(std::size_t h, std::size_t w, std::mt19937_64& rng) {
    BinaryMask mask(h, w);
    std::uniform_int_distribution<int> count(1, 3);
    std::uniform_real_distribution<double> cy(0.0, static_cast<double>(h - 1));
    std::uniform_real_distribution<double> cx(0.0, static_cast<double>(w - 1));
    std::uniform_real_distribution<double> radius(1.0, static_cast<double>(std::min(h, w)) / 4.0);
    const int n = count(rng);
    for (int e = 0; e < n; ++e) {
        const double y0 = cy(rng);
        const double x0 = cx(rng);
        const double ry = radius(rng);
        const double rx = radius(rng);
        for (std::size_t y = 0; y < h; ++y) {
            for (std::size_t x = 0; x < w; ++x) {
                const double dy = (static_cast<double>(y) - y0) / ry;
                const double dx = (static_cast<double>(x) - x0) / rx;
                if (dy * dy + dx * dx <= 1.0) {
                    mask.set(y, x, true);
                }
            }
        }
    }
    if (mask.empty()) {
        mask.set(h / 2, w / 2, true);
    }
    return mask;
}

}  // namespace painter::testing
