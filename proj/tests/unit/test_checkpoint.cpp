// Copyright (C) 2026 The Painter Authors
// SPDX-License-Identifier: Apache-2.0

#include "doctest.h"

#include <fstream>
#include <json.hpp>

#include "painter/checkpoint.hpp"
#include "painter/errors.hpp"
#include "painter/image_io.hpp"
#include "support/tempdir.hpp"

using namespace painter;
using painter::testing::TempDir;

namespace {

model::PainterModel perturbed_toy() {
    auto model = model::build_model(model::preset_config("toy"));
    std::mt19937_64 rng(12);
    for (auto& [name, tensor] : model.branch().tap_params) {
        tensor = nn::Tensor::randn(tensor.shape(), rng, 0.01);
    }
    return model;
}

}  // namespace

TEST_CASE("parameter archive round trip is bit exact") {
    TempDir dir;
    std::mt19937_64 rng(1);
    branch::ParamSet params{{"a", nn::Tensor::randn({3, 4}, rng)}, {"b.c", nn::Tensor({2}, {-0.0, 1e-300})}};
    ckpt::save_params(dir / "p.bin", params);
    const auto loaded = ckpt::load_params(dir / "p.bin");
    CHECK(loaded == params);
    CHECK(std::signbit(loaded.at("b.c")[0]));
    ckpt::save_params(dir / "q.bin", loaded);
    CHECK(io::read_file(dir / "p.bin") == io::read_file(dir / "q.bin"));
    CHECK(ckpt::params_digest(params) == ckpt::params_digest(loaded));
    CHECK(ckpt::params_digest(params).size() == 64);
}

TEST_CASE("digest changes with any value") {
    branch::ParamSet params{{"a", nn::Tensor({2}, {1.0, 2.0})}};
    const auto before = ckpt::params_digest(params);
    params.at("a")[1] = std::nextafter(2.0, 3.0);
    CHECK(ckpt::params_digest(params) != before);
}

TEST_CASE("corrupt archives raise SchemaError") {
    TempDir dir;
    io::write_file(dir / "bad.bin", std::string_view("NOTMAGIC"));
    CHECK_THROWS_AS(ckpt::load_params(dir / "bad.bin"), SchemaError);
    branch::ParamSet params{{"a", nn::Tensor({4}, 1.0)}};
    ckpt::save_params(dir / "p.bin", params);
    auto bytes = io::read_file(dir / "p.bin");
    bytes.resize(bytes.size() - 3);
    io::write_file(dir / "t.bin", bytes);
    CHECK_THROWS_AS(ckpt::load_params(dir / "t.bin"), SchemaError);
    CHECK_THROWS_AS(ckpt::load_params(dir / "missing.bin"), IoError);
}

TEST_CASE("checkpoint save, load, save produces identical bytes") {
    TempDir dir;
    const auto model = perturbed_toy();
    ckpt::save_checkpoint(dir / "a", model);
    const auto loaded = ckpt::load_checkpoint(dir / "a");
    CHECK(loaded.branch().params == model.branch().params);
    CHECK(loaded.branch().tap_params == model.branch().tap_params);
    CHECK(loaded.branch().taps == model.branch().taps);
    CHECK(loaded.config().preset == "toy");
    ckpt::save_checkpoint(dir / "b", loaded);
    CHECK(io::read_file(dir / "a" / "painter.json") == io::read_file(dir / "b" / "painter.json"));
    CHECK(io::read_file(dir / "a" / "params.bin") == io::read_file(dir / "b" / "params.bin"));
}

TEST_CASE("toy checkpoint stays under 10 MB") {
    TempDir dir;
    const auto model = perturbed_toy();
    ckpt::save_checkpoint(dir.path(), model);
    const auto size = std::filesystem::file_size(dir / "params.bin") + std::filesystem::file_size(dir / "painter.json");
    // Header, per-tensor name and dims, then 8 bytes per value.
    std::size_t expected = 12;
    for (const auto* set : {&model.branch().params, &model.branch().tap_params}) {
        for (const auto& [name, t] : *set) {
            const std::size_t stored_name = name.size() + (set == &model.branch().params ? 7 : 0);
            expected += 4 + stored_name + 4 + 8 * t.rank() + 8 * t.numel();
        }
    }
    CHECK(std::filesystem::file_size(dir / "params.bin") == expected);
    CHECK(size <= 10u * 1024 * 1024);
}

TEST_CASE("mismatched spec raises SchemaError") {
    TempDir dir;
    ckpt::save_checkpoint(dir.path(), perturbed_toy());
    auto j = nlohmann::json::parse(io::read_file(dir / "painter.json"));
    j["spec"]["layers"][0]["width"] = 16;
    io::write_file(dir / "painter.json", j.dump());
    CHECK_THROWS_AS(ckpt::load_checkpoint(dir.path()), SchemaError);
}

TEST_CASE("checkpoint over a different base raises SchemaError") {
    TempDir dir;
    ckpt::save_checkpoint(dir.path(), perturbed_toy());
    auto j = nlohmann::json::parse(io::read_file(dir / "painter.json"));
    j["base"]["seed"] = 99;
    io::write_file(dir / "painter.json", j.dump());
    CHECK_THROWS_AS(ckpt::load_checkpoint(dir.path()), SchemaError);
}

TEST_CASE("missing tap in the archive raises SchemaError") {
    TempDir dir;
    auto model = perturbed_toy();
    ckpt::save_checkpoint(dir.path(), model);
    auto params = ckpt::load_params(dir / "params.bin");
    params.erase("tap.layer0.w");
    ckpt::save_params(dir / "params.bin", params);
    CHECK_THROWS_AS(ckpt::load_checkpoint(dir.path()), SchemaError);

    io::write_file(dir / "painter.json", std::string_view("{not json"));
    CHECK_THROWS_AS(ckpt::load_checkpoint(dir.path()), SchemaError);
}

TEST_CASE("path-referenced bases") {
    TempDir dir;
    auto spec = branch::DenoiserSpec::toy();
    spec.text_dim = 768;
    const branch::BaseModel base{spec, std::make_shared<const branch::ParamSet>(branch::init_params(spec, 5))};
    ckpt::save_base(dir / "base", base);
    const auto loaded = ckpt::load_base(dir / "base");
    CHECK(loaded.spec == spec);
    CHECK(*loaded.params == *base.params);

    CHECK_THROWS_AS(model::preset_config("sd15-adapter"), ModelNotLoadedError);
    CHECK_THROWS_AS(model::preset_config("nope"), DomainError);
    auto model = model::build_model(model::preset_config("sd15-adapter", dir / "base"));
    CHECK(model.schedule().steps() == 1000);
    CHECK(model.text_encoder().config().dim == 768);
    ckpt::save_checkpoint(dir / "ckpt", model);
    const auto reloaded = ckpt::load_checkpoint(dir / "ckpt");
    CHECK(reloaded.config().preset == "sd15-adapter");
    CHECK(*reloaded.base().params == *base.params);
    // The base is referenced, not copied.
    CHECK_FALSE(std::filesystem::exists(dir / "ckpt" / "base.json"));

    // A toy-width base does not fit the toy text encoder.
    CHECK_THROWS_AS(model::build_model(model::preset_config("toy", dir / "base")), ShapeError);
}
