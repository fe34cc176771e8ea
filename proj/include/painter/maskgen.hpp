// Copyright (C) 2026 The Painter Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "painter/raster.hpp"

namespace painter::maskgen {

using Rng = std::mt19937_64;

enum class MaskKind { box, irr, seg };

std::string_view to_string(MaskKind kind);
MaskKind parse_kind(std::string_view text);

struct IntRange {
    int min = 0;
    int max = 0;
};

struct RealRange {
    double min = 0.0;
    double max = 0.0;
};

/// Knobs for the three mask families.
///
/// The dilation kernel size and iteration count are interpolated from the
/// coverage ratio r of the segmentation mask: r = 0 maps to the range maxima
/// and r = 1 to the minima, so small objects are dilated harder.
struct MaskGenParams {
    std::uint64_t seed = 0;
    RealRange box_expand{0.0, 0.3};   // fraction of the bbox side, per side
    IntRange dilation_kernel{3, 15};  // px
    IntRange dilation_iters{1, 3};
    IntRange draw_count{1, 4};        // drawing passes
    IntRange draw_sub_iters{4, 12};   // strokes per pass
    IntRange brush_width{4, 16};      // px
    IntRange stroke_length{8, 48};    // px

    /// Throws DomainError when a range is empty or negative.
    void validate() const;
};

/// Fraction of set pixels.
double coverage_ratio(const BinaryMask& mask);

/// Filled rectangle around the nonzero pixels of `seg`, each side pushed out
/// by a random fraction of the bbox side and clipped to the frame.
/// Throws EmptyMaskError on an all-zero input.
BinaryMask gen_box_mask(const BinaryMask& seg, const MaskGenParams& params, Rng& rng);

/// Finger-like scribble mask: coverage-keyed dilation followed by random
/// line/circle/square strokes seeded from the dilated pixels.
BinaryMask gen_irregular_mask(const BinaryMask& seg, const MaskGenParams& params, Rng& rng);

struct DilationSetting {
    int kernel = 1;
    int iterations = 0;
};

DilationSetting dilation_for_coverage(double coverage, const MaskGenParams& params);

/// Square-kernel dilation with the anchor at kernel/2; pixels outside the
/// frame never contribute.
BinaryMask dilate(const BinaryMask& mask, int kernel, int iterations);

/// k <= 0.25 -> box, 0.25 < k <= 0.75 -> irr, otherwise seg.
MaskKind kind_for(double k);

struct SampledMask {
    BinaryMask mask;
    MaskKind kind = MaskKind::seg;
};

/// Mixes the three families by the draw k in [0,1]. A box request on an empty
/// segmentation falls back to the segmentation itself.
SampledMask sample_mask(const BinaryMask& seg, double k, const MaskGenParams& params, Rng& rng);

/// Area-average resample to target_h × target_w (bit-exact copy when the
/// dimensions already match). Works for up- and downsampling.
SoftMask resize_mask(const BinaryMask& mask, std::size_t target_h, std::size_t target_w);

}  // namespace painter::maskgen
