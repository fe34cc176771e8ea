// Copyright (C) 2026 The Painter Authors
// SPDX-License-Identifier: Apache-2.0

// Eight-record benchmark fixture with table-driven stub clients.
//
// Every score is a dyadic rational, so sums and means are exact in binary
// floating point and can be compared with ==.

#pragma once

#include <array>
#include <map>
#include <string>

#include "painter/clients.hpp"
#include "painter/datapipe.hpp"
#include "painter/errors.hpp"

namespace painter::testing {

inline constexpr std::size_t kFixtureSize = 32;

struct FixtureRow {
    const char* id;
    const char* prompt;
    datapipe::Category category;
    double full;          // similarity on the whole image
    double local;         // similarity on any crop
    const char* phrase;   // detector phrase
    double confidence;    // detector confidence
};

// Hits: b0 (dog), b1 (cat), b3 (vase), b5 (car). Misses: b2 (conf 0.25),
// b4 (wrong noun), b6 (no detection), b7 (conf 0.34 < 0.35).
inline const std::array<FixtureRow, 8>& fixture_rows() {
    static const std::array<FixtureRow, 8> rows = {{
        {"b0", "a brown dog", datapipe::Category::animal, 0.25, 0.125, "brown dog", 0.9},
        {"b1", "the cat", datapipe::Category::animal, 0.125, 0.25, "a cat", 0.5},
        {"b2", "a smiling man", datapipe::Category::human, 0.5, 0.375, "man", 0.25},
        {"b3", "a blue vase", datapipe::Category::indoor, 0.375, 0.5, "vase on table", 0.35},
        {"b4", "an old tree", datapipe::Category::outdoor, 0.25, 0.0625, "bush", 0.95},
        {"b5", "a red car", datapipe::Category::outdoor, 0.0625, 0.1875, "car", 0.75},
        {"b6", "a cartoon fox", datapipe::Category::cartoon, 0.1875, 0.3125, "", 0.0},
        {"b7", "a lamp", datapipe::Category::indoor, 0.3125, -0.125, "lamp", 0.34},
    }};
    return rows;
}

inline const FixtureRow& fixture_row(const std::string& prompt) {
    for (const auto& r : fixture_rows()) {
        if (prompt == r.prompt) {
            return r;
        }
    }
    throw ClientError("unknown prompt '" + prompt + "'");
}

/// full-frame images score `full`, anything smaller scores `local`.
class TableSimilarity final : public clients::SimilarityClient {
public:
    double score(const RgbImage& image, const std::string& text) const override {
        const auto& r = fixture_row(text);
        return image.height() == kFixtureSize && image.width() == kFixtureSize ? r.full : r.local;
    }
};

class TableDetector final : public clients::DetectorClient {
public:
    std::vector<clients::Detection> detect(const RgbImage& image, const std::string& text) const override {
        const auto& r = fixture_row(text);
        if (*r.phrase == '\0') {
            return {};
        }
        return {{{0, 0, image.height() - 1, image.width() - 1}, r.phrase, r.confidence}};
    }
};

/// Eight records; masks are an 8×8 square at the center unless full_frame.
inline std::vector<datapipe::BenchRecord> fixture_records(bool full_frame = false) {
    std::vector<datapipe::BenchRecord> out;
    std::uint8_t shade = 10;
    for (const auto& r : fixture_rows()) {
        BinaryMask mask(kFixtureSize, kFixtureSize, full_frame ? 1 : 0);
        for (std::size_t y = 12; y < 20; ++y) {
            for (std::size_t x = 12; x < 20; ++x) {
                mask.set(y, x, true);
            }
        }
        out.push_back({r.id, RgbImage(kFixtureSize, kFixtureSize, shade), mask, mask, r.prompt,
                       maskgen::MaskKind::seg, r.category});
        shade = static_cast<std::uint8_t>(shade + 20);
    }
    return out;
}

}  // namespace painter::testing
