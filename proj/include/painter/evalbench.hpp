// Copyright (C) 2026 The Painter Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "painter/clients.hpp"
#include "painter/datapipe.hpp"
#include "painter/pipeline.hpp"

namespace painter::evalbench {

/// 100 × cosine similarity on the full image.
double clip_sim(const RgbImage& image, const std::string& prompt, const clients::SimilarityClient& sim);

/// 100 × cosine similarity on the mask's bounding box padded by pad_frac.
/// Throws EmptyMaskError for an empty mask.
double local_clip_sim(const RgbImage& image, const BinaryMask& mask, const std::string& prompt,
                      const clients::SimilarityClient& sim, double pad_frac = 0.05);

/// Last word of the prompt after case folding and dropping articles.
std::string head_noun(const std::string& prompt);

/// True when the prompt's head noun is one of the phrase's words.
bool phrase_matches(const std::string& phrase, const std::string& prompt);

struct GdinoConfig {
    double confidence = 0.35;
    double crop_pad = 0.05;
};

/// Detects on the mask crop with the prompt; a hit needs a matching phrase
/// with confidence at or above the threshold.
bool gdino_hit(const RgbImage& image, const BinaryMask& mask, const std::string& prompt,
               const clients::DetectorClient& detector, const GdinoConfig& config = {});

struct GdinoSummary {
    double accuracy = 0.0;
    std::vector<bool> hits;
    std::vector<std::string> errors;  // nonempty entry: the detector failed, counted as a miss
};

/// Mean hit rate over aligned records and generated images.
GdinoSummary gdino_acc(const std::vector<datapipe::BenchRecord>& records, const std::vector<RgbImage>& images,
                       const clients::DetectorClient& detector, const GdinoConfig& config = {});

struct EvalClients {
    const clients::SimilarityClient* similarity = nullptr;
    const clients::DetectorClient* detector = nullptr;
    const clients::ImageScorer* image_reward = nullptr;  // IR, optional
    const clients::ImageScorer* aesthetic = nullptr;     // AS, optional
};

struct EvalConfig {
    std::size_t steps = 50;
    double guidance = 7.5;
    std::uint64_t seed = 0;
    GdinoConfig gdino;
    double local_crop_pad = 0.05;
};

struct MetricsRow {
    std::string id;
    std::string category;
    std::optional<double> ir;
    std::optional<double> as;
    std::optional<double> clip_sim;
    std::optional<double> local_clip_sim;
    bool gdino_hit = false;
    std::string error;  // empty when the record evaluated cleanly
};

struct Aggregate {
    std::size_t count = 0;
    std::optional<double> ir;
    std::optional<double> as;
    std::optional<double> clip_sim;
    std::optional<double> local_clip_sim;
    std::optional<double> gdino_acc;
};

struct MetricsReport {
    std::vector<MetricsRow> rows;  // id order
    Aggregate overall;
    std::map<std::string, Aggregate> by_category;
};

/// Means over rows where a metric is present; Gdino Acc counts every row.
Aggregate aggregate(const std::vector<const MetricsRow*>& rows);

/// Inpaints each record (fixed settings, seed = config.seed + index in id
/// order) and scores it. Per-record failures are recorded on the row.
MetricsReport run_benchmark(const std::vector<datapipe::BenchRecord>& records, const pipeline::Inpainter& inpainter,
                            const EvalClients& clients, const EvalConfig& config);

std::string to_json(const MetricsReport& report);

/// Text table with columns IR, AS, CLIP Sim, Local CLIP Sim, Gdino Acc.
std::string to_table(const MetricsReport& report);

}  // namespace painter::evalbench
