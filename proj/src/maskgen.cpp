// Copyright (C) 2026 The Painter Authors
// SPDX-License-Identifier: Apache-2.0

#include "painter/maskgen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "painter/errors.hpp"

namespace painter::maskgen {

namespace {

void check_range(const IntRange& range, const char* name) {
    if (range.min < 0 || range.min > range.max) {
        throw DomainError(std::string("invalid range for ") + name);
    }
}

int uniform_int(Rng& rng, const IntRange& range) {
    return std::uniform_int_distribution<int>(range.min, range.max)(rng);
}

double uniform_real(Rng& rng, double lo, double hi) {
    if (lo == hi) {
        return lo;
    }
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

struct Point {
    double y = 0.0;
    double x = 0.0;
};

// Sets every pixel whose center lies within `radius` of segment a-b.
void draw_thick_segment(BinaryMask& mask, Point a, Point b, double radius) {
    const double min_y = std::max(0.0, std::floor(std::min(a.y, b.y) - radius));
    const double max_y = std::min(static_cast<double>(mask.height() - 1), std::ceil(std::max(a.y, b.y) + radius));
    const double min_x = std::max(0.0, std::floor(std::min(a.x, b.x) - radius));
    const double max_x = std::min(static_cast<double>(mask.width() - 1), std::ceil(std::max(a.x, b.x) + radius));
    const double dy = b.y - a.y;
    const double dx = b.x - a.x;
    const double len2 = dy * dy + dx * dx;
    const double r2 = radius * radius;
    for (auto y = static_cast<std::size_t>(min_y); y <= static_cast<std::size_t>(max_y); ++y) {
        for (auto x = static_cast<std::size_t>(min_x); x <= static_cast<std::size_t>(max_x); ++x) {
            double t = 0.0;
            if (len2 > 0.0) {
                t = std::clamp(((static_cast<double>(y) - a.y) * dy + (static_cast<double>(x) - a.x) * dx) / len2,
                               0.0, 1.0);
            }
            const double py = a.y + t * dy - static_cast<double>(y);
            const double px = a.x + t * dx - static_cast<double>(x);
            if (py * py + px * px <= r2) {
                mask.set(y, x, true);
            }
        }
    }
}

void draw_square(BinaryMask& mask, Point center, double side) {
    const double half = side / 2.0;
    const auto y0 = static_cast<std::size_t>(std::max(0.0, std::ceil(center.y - half)));
    const auto x0 = static_cast<std::size_t>(std::max(0.0, std::ceil(center.x - half)));
    const auto y1 = static_cast<std::size_t>(
        std::min(static_cast<double>(mask.height() - 1), std::floor(center.y + half)));
    const auto x1 = static_cast<std::size_t>(
        std::min(static_cast<double>(mask.width() - 1), std::floor(center.x + half)));
    for (std::size_t y = y0; y <= y1; ++y) {
        for (std::size_t x = x0; x <= x1; ++x) {
            mask.set(y, x, true);
        }
    }
}

}  // namespace

std::string_view to_string(MaskKind kind) {
    switch (kind) {
        case MaskKind::box:
            return "box";
        case MaskKind::irr:
            return "irr";
        case MaskKind::seg:
            return "seg";
    }
    return "seg";
}

MaskKind parse_kind(std::string_view text) {
    if (text == "box") {
        return MaskKind::box;
    }
    if (text == "irr") {
        return MaskKind::irr;
    }
    if (text == "seg") {
        return MaskKind::seg;
    }
    throw DomainError("unknown mask kind '" + std::string(text) + "'");
}

void MaskGenParams::validate() const {
    if (!(box_expand.min >= 0.0 && box_expand.min <= box_expand.max)) {
        throw DomainError("invalid range for box_expand");
    }
    check_range(dilation_kernel, "dilation_kernel");
    check_range(dilation_iters, "dilation_iters");
    check_range(draw_count, "draw_count");
    check_range(draw_sub_iters, "draw_sub_iters");
    check_range(brush_width, "brush_width");
    check_range(stroke_length, "stroke_length");
    if (dilation_kernel.min < 1) {
        throw DomainError("dilation kernel must be at least 1 px");
    }
}

double coverage_ratio(const BinaryMask& mask) {
    return static_cast<double>(mask.count()) / static_cast<double>(mask.size());
}

BinaryMask gen_box_mask(const BinaryMask& seg, const MaskGenParams& params, Rng& rng) {
    params.validate();
    const auto bbox = seg.bounding_box();
    if (!bbox) {
        throw EmptyMaskError("cannot build a box mask from an empty segmentation");
    }
    const auto expand = [&](std::size_t side) {
        const double frac = uniform_real(rng, params.box_expand.min, params.box_expand.max);
        return static_cast<std::size_t>(std::lround(frac * static_cast<double>(side)));
    };
    // Draw order is fixed (top, bottom, left, right) so results are seed-stable.
    const std::size_t top = expand(bbox->height());
    const std::size_t bottom = expand(bbox->height());
    const std::size_t left = expand(bbox->width());
    const std::size_t right = expand(bbox->width());

    const std::size_t y0 = bbox->y0 >= top ? bbox->y0 - top : 0;
    const std::size_t x0 = bbox->x0 >= left ? bbox->x0 - left : 0;
    const std::size_t y1 = std::min(seg.height() - 1, bbox->y1 + bottom);
    const std::size_t x1 = std::min(seg.width() - 1, bbox->x1 + right);

    BinaryMask out(seg.height(), seg.width());
    for (std::size_t y = y0; y <= y1; ++y) {
        for (std::size_t x = x0; x <= x1; ++x) {
            out.set(y, x, true);
        }
    }
    return out;
}

DilationSetting dilation_for_coverage(double coverage, const MaskGenParams& params) {
    const double r = std::clamp(coverage, 0.0, 1.0);
    const auto lerp = [r](const IntRange& range) {
        return static_cast<int>(std::lround(std::lerp(static_cast<double>(range.max),
                                                      static_cast<double>(range.min), r)));
    };
    return {lerp(params.dilation_kernel), lerp(params.dilation_iters)};
}

BinaryMask dilate(const BinaryMask& mask, int kernel, int iterations) {
    if (kernel < 1 || iterations < 0) {
        throw DomainError("dilation needs kernel >= 1 and iterations >= 0");
    }
    const auto h = static_cast<std::ptrdiff_t>(mask.height());
    const auto w = static_cast<std::ptrdiff_t>(mask.width());
    const std::ptrdiff_t lo = -(kernel / 2);
    const std::ptrdiff_t hi = kernel - 1 - kernel / 2;

    std::vector<std::uint8_t> cur = mask.pixels();
    std::vector<std::uint8_t> tmp(cur.size());
    for (int it = 0; it < iterations; ++it) {
        // Square kernels are separable: a horizontal then a vertical max.
        for (std::ptrdiff_t y = 0; y < h; ++y) {
            for (std::ptrdiff_t x = 0; x < w; ++x) {
                std::uint8_t v = 0;
                for (std::ptrdiff_t d = lo; d <= hi && !v; ++d) {
                    const auto xx = x + d;
                    if (xx >= 0 && xx < w) {
                        v = cur[y * w + xx];
                    }
                }
                tmp[y * w + x] = v;
            }
        }
        for (std::ptrdiff_t y = 0; y < h; ++y) {
            for (std::ptrdiff_t x = 0; x < w; ++x) {
                std::uint8_t v = 0;
                for (std::ptrdiff_t d = lo; d <= hi && !v; ++d) {
                    const auto yy = y + d;
                    if (yy >= 0 && yy < h) {
                        v = tmp[yy * w + x];
                    }
                }
                cur[y * w + x] = v;
            }
        }
    }
    return BinaryMask(mask.height(), mask.width(), std::move(cur));
}

BinaryMask gen_irregular_mask(const BinaryMask& seg, const MaskGenParams& params, Rng& rng) {
    params.validate();
    const auto setting = dilation_for_coverage(coverage_ratio(seg), params);
    BinaryMask out = dilate(seg, setting.kernel, setting.iterations);

    std::vector<Point> seeds;
    for (std::size_t y = 0; y < out.height(); ++y) {
        for (std::size_t x = 0; x < out.width(); ++x) {
            if (out.at(y, x)) {
                seeds.push_back({static_cast<double>(y), static_cast<double>(x)});
            }
        }
    }
    if (seeds.empty()) {
        return out;
    }

    const double max_y = static_cast<double>(out.height() - 1);
    const double max_x = static_cast<double>(out.width() - 1);
    const int passes = uniform_int(rng, params.draw_count);
    for (int pass = 0; pass < passes; ++pass) {
        Point cursor = seeds[std::uniform_int_distribution<std::size_t>(0, seeds.size() - 1)(rng)];
        const int strokes = uniform_int(rng, params.draw_sub_iters);
        for (int s = 0; s < strokes; ++s) {
            const double angle = uniform_real(rng, 0.0, 2.0 * std::numbers::pi);
            const double length = uniform_int(rng, params.stroke_length);
            const double brush = std::max(1, uniform_int(rng, params.brush_width));
            const int shape = std::uniform_int_distribution<int>(0, 2)(rng);
            const Point next{std::clamp(cursor.y + length * std::sin(angle), 0.0, max_y),
                             std::clamp(cursor.x + length * std::cos(angle), 0.0, max_x)};
            switch (shape) {
                case 0:
                    draw_thick_segment(out, cursor, next, brush / 2.0);
                    break;
                case 1:
                    draw_thick_segment(out, next, next, brush / 2.0);
                    break;
                default:
                    draw_square(out, next, brush);
                    break;
            }
            cursor = next;
        }
    }
    return out;
}

MaskKind kind_for(double k) {
    if (!(k >= 0.0 && k <= 1.0)) {
        throw DomainError("mixing draw k must lie in [0,1]");
    }
    if (k <= 0.25) {
        return MaskKind::box;
    }
    if (k <= 0.75) {
        return MaskKind::irr;
    }
    return MaskKind::seg;
}

SampledMask sample_mask(const BinaryMask& seg, double k, const MaskGenParams& params, Rng& rng) {
    switch (kind_for(k)) {
        case MaskKind::box:
            try {
                return {gen_box_mask(seg, params, rng), MaskKind::box};
            } catch (const EmptyMaskError&) {
                return {seg, MaskKind::seg};
            }
        case MaskKind::irr:
            return {gen_irregular_mask(seg, params, rng), MaskKind::irr};
        case MaskKind::seg:
            break;
    }
    return {seg, MaskKind::seg};
}

SoftMask resize_mask(const BinaryMask& mask, std::size_t target_h, std::size_t target_w) {
    if (target_h == 0 || target_w == 0) {
        throw DomainError("resize target must be at least 1x1");
    }
    const std::size_t h = mask.height();
    const std::size_t w = mask.width();
    if (h == target_h && w == target_w) {
        return SoftMask::from_binary(mask);
    }
    // Integer coordinates scaled by the target size: source pixel i spans
    // [i*target, (i+1)*target), output cell o spans [o*src, (o+1)*src).
    const auto overlaps = [](std::size_t src, std::size_t dst) {
        std::vector<std::vector<std::pair<std::size_t, std::size_t>>> out(dst);
        for (std::size_t o = 0; o < dst; ++o) {
            const std::size_t lo = o * src;
            const std::size_t hi = (o + 1) * src;
            for (std::size_t i = lo / dst; i < src && i * dst < hi; ++i) {
                const std::size_t a = std::max(lo, i * dst);
                const std::size_t b = std::min(hi, (i + 1) * dst);
                if (b > a) {
                    out[o].emplace_back(i, b - a);
                }
            }
        }
        return out;
    };
    const auto rows = overlaps(h, target_h);
    const auto cols = overlaps(w, target_w);
    const double area = static_cast<double>(h) * static_cast<double>(w);

    std::vector<double> values(target_h * target_w);
    for (std::size_t oy = 0; oy < target_h; ++oy) {
        for (std::size_t ox = 0; ox < target_w; ++ox) {
            std::size_t acc = 0;
            for (const auto& [iy, wy] : rows[oy]) {
                for (const auto& [ix, wx] : cols[ox]) {
                    acc += wy * wx * mask.at(iy, ix);
                }
            }
            values[oy * target_w + ox] = std::min(1.0, static_cast<double>(acc) / area);
        }
    }
    return SoftMask(target_h, target_w, std::move(values));
}

}  // namespace painter::maskgen
