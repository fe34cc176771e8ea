// Copyright (C) 2026 The Painter Authors
// SPDX-License-Identifier: Apache-2.0

#include "doctest.h"

#include "painter/errors.hpp"
#include "painter/pipeline.hpp"
#include "painter/synthetic.hpp"
#include "support/fixtures.hpp"

using namespace painter;
using namespace painter::pipeline;

namespace {

std::shared_ptr<const model::PainterModel> trained_toy() {
    auto model = model::build_model(model::preset_config("toy"));
    std::mt19937_64 rng(31);
    for (auto& [name, tensor] : model.branch().tap_params) {
        tensor = nn::Tensor::randn(tensor.shape(), rng, 0.05);
    }
    return std::make_shared<const model::PainterModel>(std::move(model));
}

RgbImage random_image(std::size_t h, std::size_t w, std::mt19937_64& rng) {
    std::vector<std::uint8_t> data(h * w * 3);
    for (auto& v : data) {
        v = static_cast<std::uint8_t>(rng());
    }
    return RgbImage(h, w, std::move(data));
}

InpaintRequest scene_request(std::size_t steps = 10) {
    const auto scene = synthetic::make_scenes(1, 128, 128, 2)[0];
    InpaintRequest req;
    req.image = scene.image;
    req.mask = scene.seg_mask;
    req.prompt = scene.prompt;
    req.steps = steps;
    req.seed = 9;
    return req;
}

void check_preserved(const InpaintRequest& req, const RgbImage& out) {
    REQUIRE(out.height() == req.image.height());
    REQUIRE(out.width() == req.image.width());
    for (std::size_t y = 0; y < out.height(); ++y) {
        for (std::size_t x = 0; x < out.width(); ++x) {
            if (!req.mask.at(y, x)) {
                for (std::size_t c = 0; c < 3; ++c) {
                    REQUIRE(out.at(y, x, c) == req.image.at(y, x, c));
                }
            }
        }
    }
}

}  // namespace

TEST_CASE("blend_preserve") {
    std::mt19937_64 rng(1);
    const auto gen = random_image(6, 5, rng);
    const auto orig = random_image(6, 5, rng);
    CHECK(blend_preserve(gen, orig, BinaryMask(6, 5, 1)) == gen);
    CHECK(blend_preserve(gen, orig, BinaryMask(6, 5, 0)) == orig);
    BinaryMask checker(6, 5);
    for (std::size_t y = 0; y < 6; ++y) {
        for (std::size_t x = 0; x < 5; ++x) {
            checker.set(y, x, (y + x) % 2 == 1);
        }
    }
    const auto out = blend_preserve(gen, orig, checker);
    for (std::size_t y = 0; y < 6; ++y) {
        for (std::size_t x = 0; x < 5; ++x) {
            for (std::size_t c = 0; c < 3; ++c) {
                const int m = static_cast<int>((y + x) % 2);
                const int expected = m * gen.at(y, x, c) + (1 - m) * orig.at(y, x, c);
                CHECK(out.at(y, x, c) == expected);
            }
        }
    }
    CHECK_THROWS_AS(blend_preserve(gen, orig, BinaryMask(5, 5)), ShapeError);
    CHECK_THROWS_AS(blend_preserve(random_image(6, 4, rng), orig, checker), ShapeError);
}

TEST_CASE("all-zero mask returns the input bit for bit") {
    const PainterPipeline pipe(trained_toy());
    auto req = scene_request(5);
    req.mask = BinaryMask(128, 128);
    CHECK(pipe.inpaint(req).image == req.image);
}

TEST_CASE("toy smoke run with 10 steps") {
    const PainterPipeline pipe(trained_toy());
    const auto req = scene_request(10);
    const auto result = pipe.inpaint(req);
    check_preserved(req, result.image);
    CHECK(result.settings.steps == 10);
    CHECK(result.settings.guidance == 7.5);
    CHECK(result.settings.w == 1.0);
    CHECK(result.seconds >= 0.0);
    CHECK_FALSE(result.image == req.image);
}

TEST_CASE("same request and seed give identical output") {
    const PainterPipeline pipe(trained_toy());
    const auto req = scene_request(4);
    CHECK(pipe.inpaint(req).image == pipe.inpaint(req).image);
    auto other = req;
    other.seed = 10;
    CHECK_FALSE(pipe.inpaint(other).image == pipe.inpaint(req).image);
}

TEST_CASE("preservation holds for random masks and odd sizes") {
    const PainterPipeline pipe(trained_toy());
    std::mt19937_64 rng(6);
    for (auto [h, w] : {std::pair<std::size_t, std::size_t>{40, 56}, {17, 33}, {128, 128}}) {
        InpaintRequest req;
        req.image = random_image(h, w, rng);
        req.mask = testing::random_blob(h, w, rng);
        req.prompt = "a green square";
        req.steps = 3;
        check_preserved(req, pipe.inpaint(req).image);
    }
}

TEST_CASE("guidance zero equals the unconditional path") {
    const PainterPipeline pipe(trained_toy());
    auto req = scene_request(4);
    req.guidance = 0.0;
    const auto guided = pipe.inpaint(req).image;
    req.prompt = "";
    CHECK(pipe.inpaint(req).image == guided);
}

TEST_CASE("request validation and missing model") {
    const PainterPipeline pipe(trained_toy());
    auto req = scene_request(2);
    req.steps = 0;
    CHECK_THROWS_AS(pipe.inpaint(req), DomainError);
    req = scene_request(2);
    req.guidance = -1.0;
    CHECK_THROWS_AS(pipe.inpaint(req), DomainError);
    req = scene_request(2);
    req.w = -0.5;
    CHECK_THROWS_AS(pipe.inpaint(req), DomainError);
    req = scene_request(2);
    req.mask = BinaryMask(64, 64);
    CHECK_THROWS_AS(pipe.inpaint(req), ShapeError);
    CHECK_THROWS_AS(PainterPipeline(nullptr).inpaint(scene_request(2)), ModelNotLoadedError);
}

TEST_CASE("identity inpainter echoes the image") {
    const IdentityInpainter identity;
    const auto req = scene_request(2);
    CHECK(identity.inpaint(req).image == req.image);
}
