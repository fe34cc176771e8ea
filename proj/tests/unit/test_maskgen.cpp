// Copyright (C) 2026 The Painter Authors
// SPDX-License-Identifier: Apache-2.0

#include "doctest.h"

#include <array>
#include <cmath>
#include <limits>
#include <numeric>

#include "painter/errors.hpp"
#include "painter/maskgen.hpp"
#include "support/fixtures.hpp"

using namespace painter;
using namespace painter::maskgen;

namespace {

MaskGenParams no_expansion() {
    MaskGenParams p;
    p.box_expand = {0.0, 0.0};
    return p;
}

// Brute-force square dilation, one output pixel at a time.
BinaryMask naive_dilate(const BinaryMask& m, int k, int iters) {
    BinaryMask cur = m;
    const int lo = -(k / 2);
    const int hi = k - 1 - k / 2;
    for (int it = 0; it < iters; ++it) {
        BinaryMask next(m.height(), m.width());
        for (int y = 0; y < static_cast<int>(m.height()); ++y) {
            for (int x = 0; x < static_cast<int>(m.width()); ++x) {
                bool on = false;
                for (int dy = lo; dy <= hi; ++dy) {
                    for (int dx = lo; dx <= hi; ++dx) {
                        const int yy = y + dy;
                        const int xx = x + dx;
                        if (yy >= 0 && xx >= 0 && yy < static_cast<int>(m.height()) && xx < static_cast<int>(m.width()) &&
                            cur.at(yy, xx)) {
                            on = true;
                        }
                    }
                }
                next.set(y, x, on);
            }
        }
        cur = next;
    }
    return cur;
}

// Area average through a common refinement: every source pixel is split into
// (target_h × target_w) sub-cells, every output cell averages its sub-cells.
double refined_area_value(const BinaryMask& m, std::size_t th, std::size_t tw, std::size_t oy, std::size_t ox) {
    const std::size_t fine_h = m.height() * th;
    const std::size_t fine_w = m.width() * tw;
    double acc = 0.0;
    std::size_t cells = 0;
    for (std::size_t fy = oy * (fine_h / th); fy < (oy + 1) * (fine_h / th); ++fy) {
        for (std::size_t fx = ox * (fine_w / tw); fx < (ox + 1) * (fine_w / tw); ++fx) {
            acc += m.at(fy / th, fx / tw);
            ++cells;
        }
    }
    return acc / static_cast<double>(cells);
}

}  // namespace

TEST_CASE("coverage ratio counts set pixels") {
    CHECK(coverage_ratio(BinaryMask(8, 8, 1)) == 1.0);
    CHECK(coverage_ratio(BinaryMask(8, 8, 0)) == 0.0);
    BinaryMask half(8, 8);
    for (std::size_t i = 0; i < 32; ++i) {
        half.set(i / 8, i % 8, true);
    }
    CHECK(coverage_ratio(half) == 0.5);
}

TEST_CASE("binary mask rejects invalid rasters") {
    CHECK_THROWS_AS(BinaryMask(0, 4), ShapeError);
    CHECK_THROWS_AS(BinaryMask(2, 2, std::vector<std::uint8_t>{0, 1, 2, 0}), DomainError);
}

TEST_CASE("box mask edge cases") {
    Rng rng(1);
    SUBCASE("single pixel with zero expansion is a 1x1 box") {
        BinaryMask seg(16, 16);
        seg.set(5, 5, true);
        const auto box = gen_box_mask(seg, no_expansion(), rng);
        CHECK(box == seg);
    }
    SUBCASE("full frame clips to full frame") {
        MaskGenParams p;
        p.box_expand = {0.3, 0.3};
        CHECK(gen_box_mask(BinaryMask(12, 9, 1), p, rng) == BinaryMask(12, 9, 1));
    }
    SUBCASE("empty segmentation raises") {
        CHECK_THROWS_AS(gen_box_mask(BinaryMask(4, 4), MaskGenParams{}, rng), EmptyMaskError);
    }
    SUBCASE("zero expansion equals the brute-force bounding box") {
        std::mt19937_64 gen(3);
        for (int trial = 0; trial < 50; ++trial) {
            const auto seg = testing::random_blob(40, 30, gen);
            std::size_t y0 = 99, x0 = 99, y1 = 0, x1 = 0;
            for (std::size_t y = 0; y < 40; ++y) {
                for (std::size_t x = 0; x < 30; ++x) {
                    if (seg.at(y, x)) {
                        y0 = std::min(y0, y);
                        x0 = std::min(x0, x);
                        y1 = std::max(y1, y);
                        x1 = std::max(x1, x);
                    }
                }
            }
            const auto box = gen_box_mask(seg, no_expansion(), rng);
            for (std::size_t y = 0; y < 40; ++y) {
                for (std::size_t x = 0; x < 30; ++x) {
                    const bool inside = y >= y0 && y <= y1 && x >= x0 && x <= x1;
                    REQUIRE(box.at(y, x) == (inside ? 1 : 0));
                }
            }
        }
    }
}

TEST_CASE("box and irregular masks contain the segmentation for 1000 blobs") {
    std::mt19937_64 gen(7);
    MaskGenParams params;
    int box_ok = 0;
    int irr_ok = 0;
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        const auto seg = testing::random_blob(64, 64, gen);
        Rng rng(seed);
        box_ok += gen_box_mask(seg, params, rng).contains(seg) ? 1 : 0;
        irr_ok += gen_irregular_mask(seg, params, rng).contains(seg) ? 1 : 0;
    }
    CHECK(box_ok == 1000);
    CHECK(irr_ok == 1000);
}

TEST_CASE("irregular mask short-circuits on empty input and is deterministic") {
    Rng rng(11);
    CHECK(gen_irregular_mask(BinaryMask(32, 32), MaskGenParams{}, rng) == BinaryMask(32, 32));

    std::mt19937_64 gen(5);
    const auto seg = testing::random_blob(48, 48, gen);
    Rng a(42);
    Rng b(42);
    CHECK(gen_irregular_mask(seg, MaskGenParams{}, a) == gen_irregular_mask(seg, MaskGenParams{}, b));
}

TEST_CASE("irregular mask adds strokes beyond the dilation") {
    BinaryMask seg(64, 64);
    seg.set(32, 32, true);
    MaskGenParams p;
    Rng rng(9);
    const auto setting = dilation_for_coverage(coverage_ratio(seg), p);
    const auto dilated = dilate(seg, setting.kernel, setting.iterations);
    const auto irr = gen_irregular_mask(seg, p, rng);
    CHECK(irr.contains(dilated));
    CHECK(irr.count() > dilated.count());
}

TEST_CASE("dilation schedule is monotone in coverage") {
    MaskGenParams p;
    CHECK(dilation_for_coverage(0.0, p).kernel == 15);
    CHECK(dilation_for_coverage(0.0, p).iterations == 3);
    CHECK(dilation_for_coverage(1.0, p).kernel == 3);
    CHECK(dilation_for_coverage(1.0, p).iterations == 1);
    CHECK(dilation_for_coverage(0.5, p).kernel == 9);
    int prev_k = 100;
    int prev_i = 100;
    for (int i = 0; i <= 100; ++i) {
        const auto s = dilation_for_coverage(i / 100.0, p);
        CHECK(s.kernel <= prev_k);
        CHECK(s.iterations <= prev_i);
        prev_k = s.kernel;
        prev_i = s.iterations;
    }
}

TEST_CASE("separable dilation matches brute force") {
    std::mt19937_64 gen(21);
    for (int k : {1, 2, 3, 4, 7}) {
        for (int iters : {0, 1, 2}) {
            const auto m = testing::random_blob(20, 17, gen);
            CHECK(dilate(m, k, iters) == naive_dilate(m, k, iters));
        }
    }
}

TEST_CASE("mixing draw selects the family by the printed inequalities") {
    BinaryMask seg(16, 16);
    seg.set(4, 4, true);
    Rng rng(0);
    CHECK(sample_mask(seg, 0.10, {}, rng).kind == MaskKind::box);
    CHECK(sample_mask(seg, 0.50, {}, rng).kind == MaskKind::irr);
    CHECK(sample_mask(seg, 0.90, {}, rng).kind == MaskKind::seg);
    CHECK(sample_mask(seg, 0.25, {}, rng).kind == MaskKind::box);
    CHECK(sample_mask(seg, 0.75, {}, rng).kind == MaskKind::irr);
    CHECK(sample_mask(seg, 0.0, {}, rng).kind == MaskKind::box);
    CHECK(sample_mask(seg, 1.0, {}, rng).kind == MaskKind::seg);
    CHECK(sample_mask(seg, 0.90, {}, rng).mask == seg);

    CHECK_THROWS_AS(sample_mask(seg, -0.01, {}, rng), DomainError);
    CHECK_THROWS_AS(sample_mask(seg, 1.01, {}, rng), DomainError);
    CHECK_THROWS_AS(sample_mask(seg, std::numeric_limits<double>::quiet_NaN(), {}, rng), DomainError);
}

TEST_CASE("box draw on an empty segmentation falls back to seg") {
    Rng rng(0);
    const auto out = sample_mask(BinaryMask(8, 8), 0.1, {}, rng);
    CHECK(out.kind == MaskKind::seg);
    CHECK(out.mask == BinaryMask(8, 8));
}

TEST_CASE("kind frequencies follow 25/50/25 over 100k draws") {
    Rng rng(2024);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    std::array<int, 3> counts{};
    for (int i = 0; i < 100000; ++i) {
        counts[static_cast<int>(kind_for(uniform(rng)))]++;
    }
    CHECK(std::abs(counts[0] / 1e5 - 0.25) <= 0.01);
    CHECK(std::abs(counts[1] / 1e5 - 0.50) <= 0.01);
    CHECK(std::abs(counts[2] / 1e5 - 0.25) <= 0.01);
}

TEST_CASE("resize_mask") {
    SUBCASE("constant one stays constant") {
        for (auto [h, w] : {std::pair{1, 1}, {3, 5}, {16, 16}, {40, 7}}) {
            const auto out = resize_mask(BinaryMask(13, 9, 1), h, w);
            for (double v : out.values()) {
                CHECK(v == 1.0);
            }
        }
    }
    SUBCASE("same size is a bit-identical copy") {
        std::mt19937_64 gen(1);
        const auto m = testing::random_blob(12, 10, gen);
        const auto out = resize_mask(m, 12, 10);
        for (std::size_t i = 0; i < m.size(); ++i) {
            CHECK(out.values()[i] == static_cast<double>(m.pixels()[i]));
        }
    }
    SUBCASE("2x2 checkerboard averages to one half") {
        const BinaryMask checker(2, 2, std::vector<std::uint8_t>{1, 0, 0, 1});
        CHECK(resize_mask(checker, 1, 1).values()[0] == 0.5);
    }
    SUBCASE("mean preserved when target divides source") {
        std::mt19937_64 gen(2);
        const auto m = testing::random_blob(64, 48, gen);
        for (auto [h, w] : {std::pair{16, 16}, {8, 12}, {32, 6}, {1, 1}}) {
            const auto out = resize_mask(m, h, w);
            CHECK(out.mean() == doctest::Approx(coverage_ratio(m)).epsilon(1e-14));
        }
    }
    SUBCASE("non-dividing sizes match the common-refinement oracle") {
        std::mt19937_64 gen(3);
        const auto m = testing::random_blob(7, 9, gen);
        for (auto [h, w] : {std::pair{4, 4}, {3, 5}, {10, 13}}) {
            const auto out = resize_mask(m, h, w);
            for (std::size_t y = 0; y < h; ++y) {
                for (std::size_t x = 0; x < w; ++x) {
                    CHECK(out.at(y, x) == doctest::Approx(refined_area_value(m, h, w, y, x)).epsilon(1e-12));
                    CHECK(out.at(y, x) >= 0.0);
                    CHECK(out.at(y, x) <= 1.0);
                }
            }
        }
    }
    SUBCASE("nonpositive targets raise") {
        CHECK_THROWS_AS(resize_mask(BinaryMask(4, 4), 0, 2), DomainError);
    }
}

TEST_CASE("parameter validation rejects inverted ranges") {
    MaskGenParams p;
    p.brush_width = {10, 2};
    CHECK_THROWS_AS(p.validate(), DomainError);
    MaskGenParams q;
    q.box_expand = {-0.1, 0.2};
    CHECK_THROWS_AS(q.validate(), DomainError);
}
