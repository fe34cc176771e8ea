// Copyright (C) 2026 The Painter Authors
// SPDX-License-Identifier: Apache-2.0

#include "doctest.h"

#include <json.hpp>

#include "painter/errors.hpp"
#include "painter/evalbench.hpp"
#include "support/bench_fixture.hpp"

using namespace painter;
using namespace painter::evalbench;

namespace {

class FailingDetector final : public clients::DetectorClient {
public:
    std::vector<clients::Detection> detect(const RgbImage&, const std::string&) const override {
        throw ClientError("detector offline");
    }
};

class FailingInpainter final : public pipeline::Inpainter {
public:
    pipeline::InpaintResult inpaint(const pipeline::InpaintRequest&) const override { throw Error("boom"); }
    std::string name() const override { return "failing"; }
};

class ConstScorer final : public clients::ImageScorer {
public:
    explicit ConstScorer(double v) : m_v(v) {}
    double score(const RgbImage&, const std::string&) const override { return m_v; }

private:
    double m_v;
};

}  // namespace

TEST_CASE("clip_sim scales cosine by 100") {
    const RgbImage img(8, 8, 3);
    CHECK(clip_sim(img, "x", clients::FixedSimilarity(0.2612)) == doctest::Approx(26.12).epsilon(1e-15));
    CHECK(clip_sim(img, "x", clients::FixedSimilarity(0.0)) == 0.0);
    const clients::FixedSimilarity sim(0.3);
    CHECK(clip_sim(img, "x", sim) == clip_sim(img, "x", sim));
}

TEST_CASE("local_clip_sim") {
    RgbImage img(32, 32);
    for (std::size_t y = 0; y < 32; ++y) {
        for (std::size_t x = 0; x < 32; ++x) {
            img.at(y, x, 0) = static_cast<std::uint8_t>(8 * x);
        }
    }
    CHECK(local_clip_sim(img, BinaryMask(32, 32, 1), "x", clients::FixedSimilarity(0.2267)) ==
          doctest::Approx(22.67).epsilon(1e-15));
    const clients::ColorSimilarity color;
    CHECK(local_clip_sim(img, BinaryMask(32, 32, 1), "a red thing", color) == clip_sim(img, "a red thing", color));
    CHECK_THROWS_AS(local_clip_sim(img, BinaryMask(32, 32), "x", color), EmptyMaskError);

    // Records the crop the client receives and compares with a bbox oracle.
    struct Recorder final : clients::SimilarityClient {
        mutable RgbImage seen;
        double score(const RgbImage& image, const std::string&) const override {
            seen = image;
            return 0.0;
        }
    } recorder;
    BinaryMask mask(32, 32);
    mask.set(4, 10, true);
    mask.set(23, 27, true);
    local_clip_sim(img, mask, "x", recorder, 0.05);
    // bbox rows 4..23 (20 tall, pad round(1.0) = 1), cols 10..27 (18 wide, pad round(0.9) = 1)
    CHECK(recorder.seen == img.crop({3, 9, 24, 28}));
}

TEST_CASE("head noun and phrase matching") {
    CHECK(head_noun("a red disk") == "disk");
    CHECK(head_noun("The Cat") == "cat");
    CHECK(head_noun("a dog, the") == "dog");
    CHECK(head_noun("an") == "");
    CHECK(phrase_matches("Brown DOG", "a brown dog"));
    CHECK(phrase_matches("dog on grass", "the dog"));
    CHECK_FALSE(phrase_matches("hotdog", "a dog"));
    CHECK_FALSE(phrase_matches("anything", "the"));
}

TEST_CASE("gdino accuracy") {
    const auto records = testing::fixture_records();
    std::vector<RgbImage> images;
    for (const auto& r : records) {
        images.push_back(r.image);
    }
    CHECK(gdino_acc(records, images, clients::EchoDetector()).accuracy == 1.0);
    CHECK(gdino_acc(records, images, clients::EmptyDetector()).accuracy == 0.0);

    // Fixture detector hits on exactly four of eight.
    const auto mixed = gdino_acc(records, images, testing::TableDetector());
    CHECK(mixed.accuracy == 0.5);
    CHECK(mixed.hits == std::vector<bool>{true, true, false, true, false, true, false, false});

    const auto failing = gdino_acc(records, images, FailingDetector());
    CHECK(failing.accuracy == 0.0);
    CHECK(std::all_of(failing.errors.begin(), failing.errors.end(), [](auto& e) { return !e.empty(); }));
    CHECK_THROWS_AS(gdino_acc(records, {}, clients::EchoDetector()), ShapeError);
}

TEST_CASE("gdino accuracy is monotone when a miss becomes a hit") {
    auto records = testing::fixture_records();
    std::vector<RgbImage> images;
    for (const auto& r : records) {
        images.push_back(r.image);
    }
    const double before = gdino_acc(records, images, testing::TableDetector()).accuracy;
    GdinoConfig lenient;
    lenient.confidence = 0.3;  // flips b7
    const double after = gdino_acc(records, images, testing::TableDetector(), lenient).accuracy;
    CHECK(after == 0.625);
    CHECK(after >= before);
}

TEST_CASE("empty bench gives an empty report") {
    const testing::TableSimilarity sim;
    const testing::TableDetector det;
    const auto report = run_benchmark({}, pipeline::IdentityInpainter(), {&sim, &det}, {});
    CHECK(report.rows.empty());
    CHECK(report.overall.count == 0);
    CHECK_FALSE(report.overall.clip_sim.has_value());
    CHECK_FALSE(report.overall.gdino_acc.has_value());
}

TEST_CASE("full-frame masks make local equal global per row") {
    const testing::TableSimilarity table;
    const clients::ColorSimilarity color;
    const testing::TableDetector det;
    for (const clients::SimilarityClient* sim : {static_cast<const clients::SimilarityClient*>(&color)}) {
        const auto report =
            run_benchmark(testing::fixture_records(true), pipeline::IdentityInpainter(), {sim, &det}, {});
        for (const auto& row : report.rows) {
            CHECK(row.local_clip_sim == row.clip_sim);
        }
    }
    const auto report = run_benchmark(testing::fixture_records(true), pipeline::IdentityInpainter(), {&table, &det}, {});
    for (const auto& row : report.rows) {
        CHECK(row.local_clip_sim == row.clip_sim);
    }
}

TEST_CASE("fixture aggregates match hand-computed means") {
    const testing::TableSimilarity sim;
    const testing::TableDetector det;
    auto records = testing::fixture_records();
    std::reverse(records.begin(), records.end());
    const auto report = run_benchmark(records, pipeline::IdentityInpainter(), {&sim, &det}, {});
    REQUIRE(report.rows.size() == 8);
    CHECK(report.rows.front().id == "b0");
    // (25 + 12.5 + 50 + 37.5 + 25 + 6.25 + 18.75 + 31.25) / 8
    CHECK(*report.overall.clip_sim == 25.78125);
    // (12.5 + 25 + 37.5 + 50 + 6.25 + 18.75 + 31.25 - 12.5) / 8
    CHECK(*report.overall.local_clip_sim == 21.09375);
    CHECK(*report.overall.gdino_acc == 0.5);
    CHECK_FALSE(report.overall.ir.has_value());
    CHECK_FALSE(report.overall.as.has_value());
    CHECK(*report.by_category.at("animal").clip_sim == 18.75);
    CHECK(*report.by_category.at("outdoor").local_clip_sim == 12.5);
    CHECK(*report.by_category.at("indoor").gdino_acc == 0.5);
    CHECK(report.by_category.count("other") == 0);

    // Independent summation of the rows.
    double clip = 0.0;
    for (const auto& row : report.rows) {
        clip += *row.clip_sim;
    }
    CHECK(clip / 8 == *report.overall.clip_sim);

    const auto again = run_benchmark(records, pipeline::IdentityInpainter(), {&sim, &det}, {});
    CHECK(to_json(report) == to_json(again));
    CHECK(to_table(report) == to_table(again));
}

TEST_CASE("report JSON and table layout") {
    const testing::TableSimilarity sim;
    const testing::TableDetector det;
    const ConstScorer ir(1.5);
    const auto report = run_benchmark(testing::fixture_records(), pipeline::IdentityInpainter(), {&sim, &det, &ir}, {});
    const auto j = nlohmann::json::parse(to_json(report));
    CHECK(j.at("rows").size() == 8);
    CHECK(j.at("overall").at("ir") == 1.5);
    CHECK(j.at("overall").at("as").is_null());
    CHECK(j.at("rows")[0].at("error").is_null());
    const auto table = to_table(report);
    const auto header = table.substr(0, table.find('\n'));
    const auto pos = [&](const char* s) { return header.find(s); };
    CHECK(pos("IR") < pos("AS"));
    CHECK(pos("AS") < pos("CLIP Sim"));
    CHECK(pos("CLIP Sim") < pos("Local CLIP Sim"));
    CHECK(pos("Local CLIP Sim") < pos("Gdino Acc"));
    CHECK(table.find("1.50") != std::string::npos);
    CHECK(table.find("25.78") != std::string::npos);
}

TEST_CASE("per-record failures are recorded and the run continues") {
    const testing::TableSimilarity sim;
    const FailingDetector det;
    const auto report = run_benchmark(testing::fixture_records(), pipeline::IdentityInpainter(), {&sim, &det}, {});
    CHECK(report.rows.size() == 8);
    CHECK(*report.overall.gdino_acc == 0.0);
    CHECK(report.rows[0].clip_sim.has_value());
    CHECK(report.rows[0].error.find("gdino") != std::string::npos);

    const testing::TableDetector ok;
    const auto broken = run_benchmark(testing::fixture_records(), FailingInpainter(), {&sim, &ok}, {});
    CHECK(broken.rows.size() == 8);
    CHECK_FALSE(broken.overall.clip_sim.has_value());
    CHECK(broken.rows[3].error.find("inpaint") != std::string::npos);
}

TEST_CASE("the painter pipeline runs through the harness") {
    auto model = std::make_shared<const model::PainterModel>(model::build_model(model::preset_config("toy")));
    const pipeline::PainterPipeline pipe(model);
    const clients::ColorSimilarity sim;
    const clients::EchoDetector det;
    EvalConfig config;
    config.steps = 2;
    auto records = testing::fixture_records();
    records.resize(2);
    const auto a = run_benchmark(records, pipe, {&sim, &det}, config);
    const auto b = run_benchmark(records, pipe, {&sim, &det}, config);
    CHECK(a.rows[0].error.empty());
    CHECK(to_json(a) == to_json(b));
    CHECK(*a.overall.gdino_acc == 1.0);
}
