// Copyright (C) 2026 The Painter Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "painter/clients.hpp"
#include "painter/maskgen.hpp"
#include "painter/raster.hpp"

namespace painter::datapipe {

enum class Category { human, animal, cartoon, indoor, outdoor, other };
inline constexpr std::size_t kCategoryCount = 6;

std::string_view to_string(Category category);
/// Throws DomainError for unknown names.
Category parse_category(std::string_view text);

struct BenchRecord {
    std::string id;
    RgbImage image;
    BinaryMask seg_mask;
    BinaryMask eval_mask;  // the region the model fills
    std::string prompt;
    maskgen::MaskKind kind = maskgen::MaskKind::seg;
    Category category = Category::other;
};

/// Crops `image` to the bounding box of `seg_mask` padded by pad_frac of
/// each side. Throws EmptyMaskError for an empty mask, ShapeError on size mismatch.
RgbImage crop_object(const RgbImage& image, const BinaryMask& seg_mask, double pad_frac = 0.1);

struct PromptOutcome {
    bool accepted = false;
    std::string caption;  // raw captioner output
    std::string prompt;   // shortened caption
    double score = 0.0;
};

struct PromptClients {
    const clients::CaptionerClient* captioner = nullptr;
    const clients::ShortenerClient* shortener = nullptr;
    const clients::SimilarityClient* similarity = nullptr;
};

/// crop → caption → shorten → score(crop, prompt); accepted iff score > threshold.
/// ClientError from any client is rethrown carrying `record_id`.
PromptOutcome make_local_prompt(const RgbImage& image, const BinaryMask& seg_mask, const PromptClients& clients,
                                double threshold = 0.2, const std::string& record_id = {}, double pad_frac = 0.1);

/// Raw input for shard building: an image with a segmentation mask.
struct SourceRecord {
    std::string id;
    RgbImage image;
    BinaryMask seg_mask;
    Category category = Category::other;
};

struct ShardOptions {
    maskgen::MaskGenParams mask;
    std::uint64_t seed = 0;
    double threshold = 0.2;
    double crop_pad = 0.1;
    std::size_t workers = 0;  // 0 = hardware concurrency
};

struct RecordFailure {
    std::string id;
    std::string message;
};

struct ShardStats {
    std::size_t total = 0;
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::size_t failed = 0;
    std::map<std::string, std::size_t> kinds;       // accepted records per mask kind
    std::map<std::string, std::size_t> categories;  // accepted records per category
    std::vector<RecordFailure> failures;

    double rejection_rate() const { return total ? static_cast<double>(rejected) / static_cast<double>(total) : 0.0; }
};

/// Writes manifest.jsonl (id-sorted), images/, masks/ and stats.json under
/// `out_dir`. Each record draws k and its training mask from a generator
/// seeded by (seed, id), so results do not depend on worker scheduling.
/// Failing records are reported in the stats and skipped.
ShardStats build_shard(const std::vector<SourceRecord>& sources, const std::filesystem::path& out_dir,
                       const PromptClients& clients, const ShardOptions& options);

std::string stats_json(const ShardStats& stats);

struct BenchSet {
    std::vector<BenchRecord> records;  // manifest order
    std::map<Category, std::size_t> category_counts;
};

/// Reads manifest.jsonl and its PNG assets. eval_mask defaults to seg_mask.
/// Throws SchemaError naming the offending record.
BenchSet load_bench(const std::filesystem::path& dir);

/// Writes records in the manifest layout read by load_bench.
void write_bench(const std::filesystem::path& dir, const std::vector<BenchRecord>& records);

/// Source directory: manifest.jsonl with {id, image, seg_mask, category?}.
std::vector<SourceRecord> load_sources(const std::filesystem::path& dir);
void write_sources(const std::filesystem::path& dir, const std::vector<SourceRecord>& records);

}  // namespace painter::datapipe
