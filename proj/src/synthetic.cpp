// Copyright (C) 2026 The Painter Authors
// SPDX-License-Identifier: Apache-2.0

#include "painter/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <random>

namespace painter::synthetic {

const std::vector<NamedColor>& palette() {
    static const std::vector<NamedColor> colors = {
        {"red", 220, 40, 40},     {"green", 40, 170, 60},  {"blue", 40, 70, 210},   {"yellow", 230, 210, 40},
        {"purple", 140, 50, 170}, {"orange", 240, 140, 30}, {"white", 245, 245, 245}, {"black", 15, 15, 15},
    };
    return colors;
}

std::vector<Scene> make_scenes(std::size_t count, std::size_t height, std::size_t width, std::uint64_t seed) {
    static constexpr std::array<const char*, 6> kCategories = {"human", "animal", "cartoon", "indoor", "outdoor", "other"};
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<Scene> scenes;
    for (std::size_t n = 0; n < count; ++n) {
        const auto& color = palette()[rng() % palette().size()];
        const bool disk = rng() % 2 == 0;
        const double cy = (0.3 + 0.4 * unit(rng)) * static_cast<double>(height);
        const double cx = (0.3 + 0.4 * unit(rng)) * static_cast<double>(width);
        const double ry = (0.12 + 0.15 * unit(rng)) * static_cast<double>(height);
        const double rx = (0.12 + 0.15 * unit(rng)) * static_cast<double>(width);
        const std::array<double, 3> top = {unit(rng) * 120 + 60, unit(rng) * 120 + 60, unit(rng) * 120 + 60};
        const std::array<double, 3> bottom = {unit(rng) * 120 + 60, unit(rng) * 120 + 60, unit(rng) * 120 + 60};

        Scene scene;
        char id[32];
        std::snprintf(id, sizeof id, "scene-%04zu", n);
        scene.id = id;
        scene.image = RgbImage(height, width);
        scene.seg_mask = BinaryMask(height, width);
        for (std::size_t y = 0; y < height; ++y) {
            const double f = height > 1 ? static_cast<double>(y) / static_cast<double>(height - 1) : 0.0;
            for (std::size_t x = 0; x < width; ++x) {
                const double dy = (static_cast<double>(y) + 0.5 - cy) / ry;
                const double dx = (static_cast<double>(x) + 0.5 - cx) / rx;
                const bool inside = disk ? dx * dx + dy * dy <= 1.0 : std::max(std::abs(dx), std::abs(dy)) <= 1.0;
                if (inside) {
                    scene.seg_mask.set(y, x, true);
                    scene.image.at(y, x, 0) = color.r;
                    scene.image.at(y, x, 1) = color.g;
                    scene.image.at(y, x, 2) = color.b;
                } else {
                    for (std::size_t c = 0; c < 3; ++c) {
                        scene.image.at(y, x, c) = static_cast<std::uint8_t>(std::lround((1 - f) * top[c] + f * bottom[c]));
                    }
                }
            }
        }
        scene.prompt = std::string("a ") + color.name + (disk ? " disk" : " square");
        scene.category = kCategories[n % kCategories.size()];
        scenes.push_back(std::move(scene));
    }
    return scenes;
}

}  // namespace painter::synthetic
