// Copyright (C) 2026 The Painter Authors
// SPDX-License-Identifier: Apache-2.0

#include "doctest.h"

#include <chrono>
#include <cmath>
#include <random>

#include "painter/adapters.hpp"
#include "painter/branch.hpp"
#include "painter/errors.hpp"

using namespace painter;
using namespace painter::branch;

namespace {

struct Toy {
    DenoiserSpec spec = DenoiserSpec::toy(8);
    BaseModel base;
    BranchModel branch;
    adapters::TextEncoder text{{64, 8, 32, 5}};

    Toy() {
        base.spec = spec;
        base.params = std::make_shared<const ParamSet>(init_params(spec, 1));
        branch = init_branch(spec, *base.params);
    }
};

struct Sample {
    nn::Tensor z_t;
    BranchInput input;
    nn::Tensor context;
    std::size_t t;
};

Sample random_sample(const Toy& toy, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto z_t = nn::Tensor::randn({4, 16, 16}, rng);
    auto z0m = nn::Tensor::randn({4, 16, 16}, rng);
    std::vector<double> m(256);
    std::bernoulli_distribution coin(0.3);
    for (auto& v : m) {
        v = coin(rng) ? 1.0 : 0.0;
    }
    const auto input = BranchInput::make(z_t, z0m, SoftMask(16, 16, m));
    const auto context = toy.text.encode("a red parrot");
    return {z_t, input, context, 1 + seed % 50};
}

// Perturbs every tap parameter so injections are nonzero.
void perturb_taps(BranchModel& branch, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 0.05);
    for (auto& [name, t] : branch.tap_params) {
        for (auto& v : t.values()) {
            v = normal(rng);
        }
    }
}

}  // namespace

TEST_CASE("toy preset instantiates quickly") {
    const auto start = std::chrono::steady_clock::now();
    Toy toy;
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    CHECK(seconds < 1.0);
    CHECK(toy.spec.layer_count() == 4);
    CHECK(toy.spec.attention_sites() == std::vector<std::size_t>{2});
}

TEST_CASE("init_branch creates one tap per layer and per attention site") {
    Toy toy;
    std::size_t layer_taps = 0;
    std::size_t attn_taps = 0;
    for (const auto& tap : toy.branch.taps) {
        (tap.site == TapSite::layer ? layer_taps : attn_taps)++;
    }
    CHECK(layer_taps == 4);
    CHECK(attn_taps == 1);
    for (const auto& [name, t] : toy.branch.tap_params) {
        for (double v : t.values()) {
            REQUIRE(v == 0.0);
        }
    }
    CHECK(toy.branch.spec.in_channels == 9);
}

TEST_CASE("widened stem reproduces the base stem when extra channels are zero") {
    Toy toy;
    std::mt19937_64 rng(3);
    const auto x4 = nn::Tensor::randn({4, 16, 16}, rng);
    nn::Tensor x9({9, 16, 16});
    std::copy_n(x4.data(), x4.numel(), x9.data());
    const auto& bp = *toy.base.params;
    const auto& rp = toy.branch.params;
    const auto base_out =
        nn::conv2d(nn::constant(x4), nn::constant(bp.at("stem.w")), nn::constant(bp.at("stem.b"))).value();
    const auto branch_out =
        nn::conv2d(nn::constant(x9), nn::constant(rp.at("stem.w")), nn::constant(rp.at("stem.b"))).value();
    CHECK(nn::max_abs_diff(base_out, branch_out) == 0.0);
}

TEST_CASE("parameter count equals base + widening + taps by direct enumeration") {
    Toy toy;
    const auto& s = toy.spec;
    // Independent count from the architecture description.
    std::size_t base = s.stem_width * 4 * 9 + s.stem_width;
    std::size_t taps = 0;
    std::size_t in = s.stem_width;
    for (const auto& layer : s.layers) {
        base += layer.width * in * 9 + layer.width;           // conv1
        base += layer.width * layer.width * 9 + layer.width;  // conv2
        base += layer.width * s.time_dim + layer.width;       // time projection
        if (in != layer.width) {
            base += layer.width * in + layer.width;
        }
        taps += in * layer.width + in;
        if (layer.attention) {
            const std::size_t hd = s.heads * s.head_dim;
            base += hd * layer.width + 2 * hd * s.text_dim + layer.width * hd + layer.width;
            taps += layer.width * layer.width + layer.width;
        }
        in = layer.width;
    }
    base += s.out_channels * in * 9 + s.out_channels;
    const std::size_t widening = s.stem_width * 5 * 9;

    CHECK(param_count(*toy.base.params) == base);
    CHECK(param_count(toy.branch.params) + param_count(toy.branch.tap_params) == base + widening + taps);
}

TEST_CASE("joint forward is transparent at init and with w = 0") {
    Toy toy;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto s = random_sample(toy, seed);
        const auto reference = base_forward(toy.base, s.z_t, s.t, s.context);
        for (double w : {0.0, 1.0, 3.5}) {
            for (auto mode : {AttnInjection::post, AttnInjection::pre}) {
                const auto joint = forward_joint(toy.base, toy.branch, s.z_t, s.input, s.t, s.context, {w, mode});
                CHECK(nn::max_abs_diff(joint, reference) <= 1e-5);
            }
        }
    }
    perturb_taps(toy.branch, 4);
    const auto s = random_sample(toy, 9);
    const auto reference = base_forward(toy.base, s.z_t, s.t, s.context);
    CHECK(nn::max_abs_diff(forward_joint(toy.base, toy.branch, s.z_t, s.input, s.t, s.context, {0.0, {}}), reference) ==
          0.0);
    CHECK(nn::max_abs_diff(forward_joint(toy.base, toy.branch, s.z_t, s.input, s.t, s.context, {1.0, {}}), reference) >
          0.0);
}

TEST_CASE("one gradient step on the taps makes the branch visible") {
    Toy toy;
    const auto s = random_sample(toy, 1);
    std::mt19937_64 rng(2);
    const auto eps = nn::Tensor::randn({4, 16, 16}, rng);
    auto vars = make_vars(toy.branch, true);
    const auto out = forward_joint(toy.base, toy.branch, vars, s.z_t, s.input, s.t, s.context, {1.0, {}});
    nn::backward(nn::mse(out.prediction, nn::constant(eps)));
    double grad_norm = 0.0;
    for (auto& [name, t] : toy.branch.tap_params) {
        const auto& g = vars.taps.at(name).grad();
        REQUIRE(g.numel() == t.numel());
        for (std::size_t i = 0; i < t.numel(); ++i) {
            t[i] -= 0.1 * g[i];
            grad_norm += g[i] * g[i];
        }
    }
    CHECK(grad_norm > 0.0);
    const auto reference = base_forward(toy.base, s.z_t, s.t, s.context);
    const auto joint = forward_joint(toy.base, toy.branch, s.z_t, s.input, s.t, s.context, {1.0, {}});
    CHECK(nn::max_abs_diff(joint, reference) > 0.0);
}

TEST_CASE("tap contribution is linear in w") {
    Toy toy;
    perturb_taps(toy.branch, 5);
    const auto vars = make_vars(toy.branch, false);
    std::mt19937_64 rng(6);
    const auto feature = nn::constant(nn::Tensor::randn({32, 8, 8}, rng));
    for (const auto& tap : toy.branch.taps) {
        if (tap.site != TapSite::attention) {
            continue;
        }
        const auto one = tap_contribution(tap, vars.taps, feature, 1.0).value();
        const auto two = tap_contribution(tap, vars.taps, feature, 2.0).value();
        for (std::size_t i = 0; i < one.numel(); ++i) {
            REQUIRE(two[i] == 2.0 * one[i]);
        }
    }
}

TEST_CASE("attention probabilities") {
    SUBCASE("zero queries give uniform rows") {
        std::mt19937_64 rng(1);
        const auto probs = attention_probs(nn::Tensor({5, 4}), nn::Tensor::randn({7, 4}, rng));
        for (double v : probs.values()) {
            CHECK(v == doctest::Approx(1.0 / 7.0).epsilon(1e-15));
        }
    }
    SUBCASE("a single token gets all the mass") {
        std::mt19937_64 rng(2);
        const auto probs = attention_probs(nn::Tensor::randn({6, 4}, rng), nn::Tensor::randn({1, 4}, rng));
        for (double v : probs.values()) {
            CHECK(v == 1.0);
        }
    }
    SUBCASE("hand-sized case matches a scalar-loop softmax") {
        const nn::Tensor q({2, 3}, {0.5, -1.0, 2.0, 1.5, 0.25, -0.75});
        const nn::Tensor k({4, 3}, {1.0, 0.0, -1.0, 0.3, 0.3, 0.3, -2.0, 1.0, 0.5, 0.0, -0.5, 1.25});
        const auto probs = attention_probs(q, k);
        for (int r = 0; r < 2; ++r) {
            double logits[4];
            double total = 0.0;
            for (int j = 0; j < 4; ++j) {
                logits[j] = 0.0;
                for (int d = 0; d < 3; ++d) {
                    logits[j] += q[r * 3 + d] * k[j * 3 + d];
                }
                logits[j] = std::exp(logits[j] / std::sqrt(3.0));
                total += logits[j];
            }
            for (int j = 0; j < 4; ++j) {
                CHECK(std::abs(probs[r * 4 + j] - logits[j] / total) <= 1e-12);
            }
        }
    }
}

TEST_CASE("captured branch maps are row-stochastic and deterministic") {
    Toy toy;
    const auto s = random_sample(toy, 3);
    const auto maps = capture_attention_maps(toy.branch, s.input, s.t, s.context);
    REQUIRE(maps.size() == 1);
    CHECK(maps[0].layer == 2);
    CHECK(maps[0].height == 8);
    CHECK(maps[0].probs.dim(0) == 64);
    CHECK(maps[0].probs.dim(1) == 8);
    for (std::size_t r = 0; r < 64; ++r) {
        double total = 0.0;
        for (std::size_t j = 0; j < 8; ++j) {
            total += maps[0].probs[r * 8 + j];
        }
        CHECK(std::abs(total - 1.0) <= 1e-6);
    }
    const auto again = capture_attention_maps(toy.branch, s.input, s.t, s.context);
    CHECK(again[0].probs == maps[0].probs);
}

TEST_CASE("multi-head maps average over heads") {
    auto spec = DenoiserSpec::toy(8);
    spec.heads = 2;
    spec.head_dim = 8;
    const auto params = init_params(spec, 3);
    const auto branch = init_branch(spec, params);
    const adapters::TextEncoder text({64, 8, 32, 5});
    std::mt19937_64 rng(4);
    const auto input = BranchInput::make(nn::Tensor::randn({4, 16, 16}, rng), nn::Tensor::randn({4, 16, 16}, rng),
                                         SoftMask(16, 16, 0.0));
    const auto maps = capture_attention_maps(branch, input, 10, text.encode("a cat"));
    for (std::size_t r = 0; r < 64; ++r) {
        double total = 0.0;
        for (std::size_t j = 0; j < 8; ++j) {
            total += maps[0].probs[r * 8 + j];
        }
        CHECK(std::abs(total - 1.0) <= 1e-12);
    }
}

TEST_CASE("shape and tap errors") {
    Toy toy;
    auto broken = *toy.base.params;
    broken.erase("out.b");
    CHECK_THROWS_AS(init_branch(toy.spec, broken), ShapeError);

    auto missing = toy.branch;
    missing.taps.pop_back();
    const auto s = random_sample(toy, 0);
    CHECK_THROWS_AS(forward_joint(toy.base, missing, s.z_t, s.input, s.t, s.context, {}), MissingTapError);

    CHECK_THROWS_AS(BranchInput::make(nn::Tensor({4, 16, 16}), nn::Tensor({4, 8, 8}), SoftMask(16, 16)), ShapeError);
    CHECK_THROWS_AS(BranchInput::make(nn::Tensor({4, 16, 16}), nn::Tensor({4, 16, 16}), SoftMask(8, 8)), ShapeError);
    CHECK_THROWS_AS(base_forward(toy.base, nn::Tensor({4, 15, 16}), 1, s.context), ShapeError);
}
