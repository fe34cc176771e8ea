// Copyright (C) 2026 The Painter Authors
// SPDX-License-Identifier: Apache-2.0

#include "painter/datapipe.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>
#include <thread>

#include "painter/errors.hpp"
#include "painter/image_io.hpp"

namespace painter::datapipe {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

constexpr std::array<std::string_view, kCategoryCount> kCategoryNames = {"human",   "animal",  "cartoon",
                                                                        "indoor",  "outdoor", "other"};

std::uint64_t fnv1a(std::string_view text) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

bool valid_id(const std::string& id) {
    if (id.empty() || id.front() == '.') {
        return false;
    }
    return std::all_of(id.begin(), id.end(), [](unsigned char c) {
        return std::isalnum(c) || c == '-' || c == '_' || c == '.';
    });
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
    const auto bytes = io::read_file(path);
    std::vector<std::string> lines;
    std::string line;
    std::istringstream in(std::string(bytes.begin(), bytes.end()));
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.find_first_not_of(" \t") != std::string::npos) {
            lines.push_back(line);
        }
    }
    return lines;
}

std::filesystem::path asset_path(const std::filesystem::path& dir, const std::string& rel, const std::string& id) {
    const std::filesystem::path p(rel);
    if (rel.empty() || p.is_absolute()) {
        throw SchemaError("asset path must be relative: '" + rel + "'", id);
    }
    for (const auto& part : p) {
        if (part == "..") {
            throw SchemaError("asset path leaves the dataset: '" + rel + "'", id);
        }
    }
    return dir / p;
}

template <typename T>
T field(const json& j, const char* key, const std::string& id) {
    if (!j.contains(key)) {
        throw SchemaError(std::string("missing field '") + key + "'", id);
    }
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw SchemaError(std::string("field '") + key + "' has the wrong type", id);
    }
}

template <typename F>
auto with_id(const std::string& id, F&& fn) {
    try {
        return fn();
    } catch (const SchemaError&) {
        throw;
    } catch (const Error& e) {
        throw SchemaError(e.what(), id);
    }
}

std::string read_id(const json& j, std::size_t line_no) {
    const std::string fallback = "line " + std::to_string(line_no);
    if (!j.is_object()) {
        throw SchemaError("manifest line is not an object", fallback);
    }
    const auto id = field<std::string>(j, "id", fallback);
    if (!valid_id(id)) {
        throw SchemaError("invalid record id", id.empty() ? fallback : id);
    }
    return id;
}

std::vector<json> read_manifest(const std::filesystem::path& dir) {
    std::vector<json> out;
    std::size_t line_no = 0;
    for (const auto& line : read_lines(dir / "manifest.jsonl")) {
        ++line_no;
        try {
            out.push_back(json::parse(line));
        } catch (const json::exception& e) {
            throw SchemaError(std::string("malformed JSON: ") + e.what(), "line " + std::to_string(line_no));
        }
    }
    return out;
}

struct Paths {
    std::string image;
    std::string seg;
    std::string eval;
};

Paths paths_for(const std::string& id) {
    return {"images/" + id + ".png", "masks/" + id + ".seg.png", "masks/" + id + ".eval.png"};
}

void ensure_dirs(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir / "images", ec);
    std::filesystem::create_directories(dir / "masks", ec);
    if (ec) {
        throw IoError("cannot create " + dir.string() + ": " + ec.message());
    }
}

ordered_json manifest_line(const BenchRecord& r) {
    const auto p = paths_for(r.id);
    ordered_json j;
    j["id"] = r.id;
    j["image"] = p.image;
    j["seg_mask"] = p.seg;
    j["eval_mask"] = p.eval;
    j["prompt"] = r.prompt;
    j["kind"] = std::string(maskgen::to_string(r.kind));
    j["category"] = std::string(to_string(r.category));
    return j;
}

}  // namespace

std::string_view to_string(Category category) {
    return kCategoryNames[static_cast<std::size_t>(category)];
}

Category parse_category(std::string_view text) {
    for (std::size_t i = 0; i < kCategoryNames.size(); ++i) {
        if (kCategoryNames[i] == text) {
            return static_cast<Category>(i);
        }
    }
    throw DomainError("unknown category '" + std::string(text) + "'");
}

RgbImage crop_object(const RgbImage& image, const BinaryMask& seg_mask, double pad_frac) {
    if (seg_mask.height() != image.height() || seg_mask.width() != image.width()) {
        throw ShapeError("mask and image sizes differ");
    }
    const auto box = seg_mask.bounding_box();
    if (!box) {
        throw EmptyMaskError("cannot crop an empty mask");
    }
    return image.crop(pad_box(*box, pad_frac, image.height(), image.width()));
}

PromptOutcome make_local_prompt(const RgbImage& image, const BinaryMask& seg_mask, const PromptClients& clients,
                                double threshold, const std::string& record_id, double pad_frac) {
    if (!clients.captioner || !clients.shortener || !clients.similarity) {
        throw DomainError("prompt pipeline needs captioner, shortener and similarity clients");
    }
    if (!(threshold >= -1.0 && threshold <= 1.0)) {
        throw DomainError("threshold must lie in [-1,1]");
    }
    const RgbImage crop = crop_object(image, seg_mask, pad_frac);
    PromptOutcome out;
    try {
        out.caption = clients.captioner->caption(crop);
        out.prompt = clients.shortener->shorten(out.caption);
        out.score = clients.similarity->score(crop, out.prompt);
    } catch (const ClientError& e) {
        if (!e.record_id().empty() || record_id.empty()) {
            throw;
        }
        throw ClientError(e.what(), record_id);
    }
    out.accepted = !out.prompt.empty() && out.score > threshold;
    return out;
}

ShardStats build_shard(const std::vector<SourceRecord>& sources, const std::filesystem::path& out_dir,
                       const PromptClients& clients, const ShardOptions& options) {
    options.mask.validate();
    if (!clients.captioner || !clients.shortener || !clients.similarity) {
        throw DomainError("shard building needs captioner, shortener and similarity clients");
    }
    std::vector<const SourceRecord*> order;
    for (const auto& s : sources) {
        order.push_back(&s);
    }
    std::stable_sort(order.begin(), order.end(), [](auto* a, auto* b) { return a->id < b->id; });

    struct Outcome {
        std::optional<BenchRecord> record;
        std::string failure;  // nonempty when the record failed
    };
    std::vector<Outcome> outcomes(order.size());

    std::set<std::string> seen;
    std::vector<bool> duplicate(order.size(), false);
    for (std::size_t i = 0; i < order.size(); ++i) {
        duplicate[i] = !seen.insert(order[i]->id).second;
    }

    auto process = [&](std::size_t i) {
        const SourceRecord& src = *order[i];
        Outcome& out = outcomes[i];
        try {
            if (!valid_id(src.id)) {
                throw SchemaError("invalid record id", src.id);
            }
            if (duplicate[i]) {
                throw SchemaError("duplicate record id", src.id);
            }
            const std::uint64_t h = fnv1a(src.id);
            std::seed_seq seq{static_cast<std::uint32_t>(options.seed), static_cast<std::uint32_t>(options.seed >> 32),
                              static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
            maskgen::Rng rng(seq);
            std::uniform_real_distribution<double> unit(0.0, 1.0);
            const double k = unit(rng);
            const auto sampled = maskgen::sample_mask(src.seg_mask, k, options.mask, rng);
            const auto prompt =
                make_local_prompt(src.image, src.seg_mask, clients, options.threshold, src.id, options.crop_pad);
            if (prompt.accepted) {
                out.record = BenchRecord{src.id, src.image, src.seg_mask, sampled.mask, prompt.prompt, sampled.kind,
                                         src.category};
            }
        } catch (const std::exception& e) {
            out.failure = e.what();
            if (out.failure.empty()) {
                out.failure = "unknown error";
            }
        }
    };

    std::size_t workers = options.workers ? options.workers : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, std::max<std::size_t>(order.size(), 1));
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < order.size(); i = next++) {
                process(i);
            }
        });
    }
    for (auto& t : pool) {
        t.join();
    }

    ShardStats stats;
    stats.total = order.size();
    std::vector<BenchRecord> accepted;
    for (std::size_t i = 0; i < order.size(); ++i) {
        auto& out = outcomes[i];
        if (!out.failure.empty()) {
            ++stats.failed;
            stats.failures.push_back({order[i]->id, out.failure});
        } else if (out.record) {
            ++stats.accepted;
            ++stats.kinds[std::string(maskgen::to_string(out.record->kind))];
            ++stats.categories[std::string(to_string(out.record->category))];
            accepted.push_back(std::move(*out.record));
        } else {
            ++stats.rejected;
        }
    }
    write_bench(out_dir, accepted);
    io::write_file(out_dir / "stats.json", stats_json(stats) + "\n");
    return stats;
}

std::string stats_json(const ShardStats& stats) {
    ordered_json j;
    j["total"] = stats.total;
    j["accepted"] = stats.accepted;
    j["rejected"] = stats.rejected;
    j["failed"] = stats.failed;
    j["rejection_rate"] = stats.rejection_rate();
    j["kinds"] = stats.kinds;
    j["categories"] = stats.categories;
    j["failures"] = ordered_json::array();
    for (const auto& f : stats.failures) {
        j["failures"].push_back({{"id", f.id}, {"message", f.message}});
    }
    return j.dump(2);
}

void write_bench(const std::filesystem::path& dir, const std::vector<BenchRecord>& records) {
    ensure_dirs(dir);
    std::string manifest;
    for (const auto& r : records) {
        const auto p = paths_for(r.id);
        io::write_png(dir / p.image, r.image);
        io::write_png(dir / p.seg, r.seg_mask);
        io::write_png(dir / p.eval, r.eval_mask);
        manifest += manifest_line(r).dump() + "\n";
    }
    io::write_file(dir / "manifest.jsonl", manifest);
}

BenchSet load_bench(const std::filesystem::path& dir) {
    BenchSet set;
    for (std::size_t c = 0; c < kCategoryCount; ++c) {
        set.category_counts[static_cast<Category>(c)] = 0;
    }
    std::set<std::string> ids;
    std::size_t line_no = 0;
    for (const auto& j : read_manifest(dir)) {
        ++line_no;
        BenchRecord r;
        r.id = read_id(j, line_no);
        if (!ids.insert(r.id).second) {
            throw SchemaError("duplicate record id", r.id);
        }
        const auto image = field<std::string>(j, "image", r.id);
        const auto seg = field<std::string>(j, "seg_mask", r.id);
        r.prompt = field<std::string>(j, "prompt", r.id);
        if (r.prompt.empty()) {
            throw SchemaError("empty prompt", r.id);
        }
        const auto kind = field<std::string>(j, "kind", r.id);
        const auto category = field<std::string>(j, "category", r.id);
        with_id(r.id, [&] {
            r.kind = maskgen::parse_kind(kind);
            r.category = parse_category(category);
            r.image = io::read_png_rgb(asset_path(dir, image, r.id));
            r.seg_mask = io::read_png_mask(asset_path(dir, seg, r.id));
            if (j.contains("eval_mask") && !j.at("eval_mask").is_null()) {
                r.eval_mask = io::read_png_mask(asset_path(dir, field<std::string>(j, "eval_mask", r.id), r.id));
            } else {
                r.eval_mask = r.seg_mask;
            }
            return 0;
        });
        for (const BinaryMask* m : {&r.seg_mask, &r.eval_mask}) {
            if (m->height() != r.image.height() || m->width() != r.image.width()) {
                throw SchemaError("mask is " + std::to_string(m->height()) + "x" + std::to_string(m->width()) +
                                      " but image is " + std::to_string(r.image.height()) + "x" +
                                      std::to_string(r.image.width()),
                                  r.id);
            }
        }
        ++set.category_counts[r.category];
        set.records.push_back(std::move(r));
    }
    return set;
}

std::vector<SourceRecord> load_sources(const std::filesystem::path& dir) {
    std::vector<SourceRecord> out;
    std::size_t line_no = 0;
    for (const auto& j : read_manifest(dir)) {
        ++line_no;
        SourceRecord r;
        r.id = read_id(j, line_no);
        const auto image = field<std::string>(j, "image", r.id);
        const auto seg = field<std::string>(j, "seg_mask", r.id);
        with_id(r.id, [&] {
            if (j.contains("category")) {
                r.category = parse_category(field<std::string>(j, "category", r.id));
            }
            r.image = io::read_png_rgb(asset_path(dir, image, r.id));
            r.seg_mask = io::read_png_mask(asset_path(dir, seg, r.id));
            return 0;
        });
        if (r.seg_mask.height() != r.image.height() || r.seg_mask.width() != r.image.width()) {
            throw SchemaError("mask and image sizes differ", r.id);
        }
        out.push_back(std::move(r));
    }
    return out;
}

void write_sources(const std::filesystem::path& dir, const std::vector<SourceRecord>& records) {
    ensure_dirs(dir);
    std::string manifest;
    for (const auto& r : records) {
        const auto p = paths_for(r.id);
        io::write_png(dir / p.image, r.image);
        io::write_png(dir / p.seg, r.seg_mask);
        ordered_json j;
        j["id"] = r.id;
        j["image"] = p.image;
        j["seg_mask"] = p.seg;
        j["category"] = std::string(to_string(r.category));
        manifest += j.dump() + "\n";
    }
    io::write_file(dir / "manifest.jsonl", manifest);
}

}  // namespace painter::datapipe
