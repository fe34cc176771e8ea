// Copyright (C) 2026 The Painter Authors
// SPDX-License-Identifier: Apache-2.0

#include "painter/evalbench.hpp"

#include <algorithm>
#include <cstdio>
#include <json.hpp>

#include "painter/adapters.hpp"
#include "painter/errors.hpp"

namespace painter::evalbench {

namespace {

using nlohmann::ordered_json;

ordered_json opt(const std::optional<double>& v) {
    return v ? ordered_json(*v) : ordered_json(nullptr);
}

std::string cell(const std::optional<double>& v) {
    if (!v) {
        return "-";
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", *v);
    return buf;
}

ordered_json aggregate_json(const Aggregate& a) {
    ordered_json j;
    j["count"] = a.count;
    j["ir"] = opt(a.ir);
    j["as"] = opt(a.as);
    j["clip_sim"] = opt(a.clip_sim);
    j["local_clip_sim"] = opt(a.local_clip_sim);
    j["gdino_acc"] = opt(a.gdino_acc);
    return j;
}

std::optional<double> mean_of(const std::vector<const MetricsRow*>& rows, std::optional<double> MetricsRow::*field) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto* row : rows) {
        if (row->*field) {
            sum += *(row->*field);
            ++n;
        }
    }
    if (n == 0) {
        return std::nullopt;
    }
    return sum / static_cast<double>(n);
}

void note(std::string& error, const std::string& what) {
    error += (error.empty() ? "" : "; ") + what;
}

}  // namespace

double clip_sim(const RgbImage& image, const std::string& prompt, const clients::SimilarityClient& sim) {
    return 100.0 * sim.score(image, prompt);
}

double local_clip_sim(const RgbImage& image, const BinaryMask& mask, const std::string& prompt,
                      const clients::SimilarityClient& sim, double pad_frac) {
    return 100.0 * sim.score(datapipe::crop_object(image, mask, pad_frac), prompt);
}

std::string head_noun(const std::string& prompt) {
    const auto words = adapters::split_words(prompt);
    for (auto it = words.rbegin(); it != words.rend(); ++it) {
        if (*it != "a" && *it != "an" && *it != "the") {
            return *it;
        }
    }
    return {};
}

bool phrase_matches(const std::string& phrase, const std::string& prompt) {
    const auto noun = head_noun(prompt);
    if (noun.empty()) {
        return false;
    }
    const auto words = adapters::split_words(phrase);
    return std::find(words.begin(), words.end(), noun) != words.end();
}

bool gdino_hit(const RgbImage& image, const BinaryMask& mask, const std::string& prompt,
               const clients::DetectorClient& detector, const GdinoConfig& config) {
    const auto crop = datapipe::crop_object(image, mask, config.crop_pad);
    for (const auto& det : detector.detect(crop, prompt)) {
        if (det.confidence >= config.confidence && phrase_matches(det.phrase, prompt)) {
            return true;
        }
    }
    return false;
}

GdinoSummary gdino_acc(const std::vector<datapipe::BenchRecord>& records, const std::vector<RgbImage>& images,
                       const clients::DetectorClient& detector, const GdinoConfig& config) {
    if (records.size() != images.size()) {
        throw ShapeError("records and generated images are not aligned");
    }
    GdinoSummary out;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < records.size(); ++i) {
        bool hit = false;
        std::string error;
        try {
            hit = gdino_hit(images[i], records[i].eval_mask, records[i].prompt, detector, config);
        } catch (const Error& e) {
            error = e.what();
        }
        hits += hit;
        out.hits.push_back(hit);
        out.errors.push_back(error);
    }
    out.accuracy = records.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(records.size());
    return out;
}

Aggregate aggregate(const std::vector<const MetricsRow*>& rows) {
    Aggregate a;
    a.count = rows.size();
    a.ir = mean_of(rows, &MetricsRow::ir);
    a.as = mean_of(rows, &MetricsRow::as);
    a.clip_sim = mean_of(rows, &MetricsRow::clip_sim);
    a.local_clip_sim = mean_of(rows, &MetricsRow::local_clip_sim);
    if (!rows.empty()) {
        std::size_t hits = 0;
        for (const auto* row : rows) {
            hits += row->gdino_hit;
        }
        a.gdino_acc = static_cast<double>(hits) / static_cast<double>(rows.size());
    }
    return a;
}

MetricsReport run_benchmark(const std::vector<datapipe::BenchRecord>& records, const pipeline::Inpainter& inpainter,
                            const EvalClients& clients, const EvalConfig& config) {
    if (!clients.similarity || !clients.detector) {
        throw DomainError("benchmark needs similarity and detector clients");
    }
    std::vector<const datapipe::BenchRecord*> order;
    for (const auto& r : records) {
        order.push_back(&r);
    }
    std::stable_sort(order.begin(), order.end(), [](auto* a, auto* b) { return a->id < b->id; });

    MetricsReport report;
    for (std::size_t i = 0; i < order.size(); ++i) {
        const auto& rec = *order[i];
        MetricsRow row;
        row.id = rec.id;
        row.category = std::string(datapipe::to_string(rec.category));

        pipeline::InpaintRequest req;
        req.image = rec.image;
        req.mask = rec.eval_mask;
        req.prompt = rec.prompt;
        req.steps = config.steps;
        req.guidance = config.guidance;
        req.seed = config.seed + i;
        std::optional<RgbImage> generated;
        try {
            generated = inpainter.inpaint(req).image;
        } catch (const std::exception& e) {
            note(row.error, std::string("inpaint: ") + e.what());
        }
        if (generated) {
            auto attempt = [&](const char* what, auto&& fn) {
                try {
                    fn();
                } catch (const std::exception& e) {
                    note(row.error, std::string(what) + ": " + e.what());
                }
            };
            if (clients.image_reward) {
                attempt("ir", [&] { row.ir = clients.image_reward->score(*generated, rec.prompt); });
            }
            if (clients.aesthetic) {
                attempt("as", [&] { row.as = clients.aesthetic->score(*generated, rec.prompt); });
            }
            attempt("clip_sim", [&] { row.clip_sim = clip_sim(*generated, rec.prompt, *clients.similarity); });
            attempt("local_clip_sim", [&] {
                row.local_clip_sim =
                    local_clip_sim(*generated, rec.eval_mask, rec.prompt, *clients.similarity, config.local_crop_pad);
            });
            attempt("gdino", [&] {
                row.gdino_hit = gdino_hit(*generated, rec.eval_mask, rec.prompt, *clients.detector, config.gdino);
            });
        }
        report.rows.push_back(std::move(row));
    }

    std::vector<const MetricsRow*> all;
    std::map<std::string, std::vector<const MetricsRow*>> groups;
    for (const auto& row : report.rows) {
        all.push_back(&row);
        groups[row.category].push_back(&row);
    }
    report.overall = aggregate(all);
    for (const auto& [category, rows] : groups) {
        report.by_category[category] = aggregate(rows);
    }
    return report;
}

std::string to_json(const MetricsReport& report) {
    ordered_json j;
    j["rows"] = ordered_json::array();
    for (const auto& row : report.rows) {
        ordered_json r;
        r["id"] = row.id;
        r["category"] = row.category;
        r["ir"] = opt(row.ir);
        r["as"] = opt(row.as);
        r["clip_sim"] = opt(row.clip_sim);
        r["local_clip_sim"] = opt(row.local_clip_sim);
        r["gdino_hit"] = row.gdino_hit;
        r["error"] = row.error.empty() ? ordered_json(nullptr) : ordered_json(row.error);
        j["rows"].push_back(std::move(r));
    }
    j["overall"] = aggregate_json(report.overall);
    j["by_category"] = ordered_json::object();
    for (const auto& [category, agg] : report.by_category) {
        j["by_category"][category] = aggregate_json(agg);
    }
    return j.dump(2);
}

std::string to_table(const MetricsReport& report) {
    char line[160];
    std::string out;
    auto row = [&](const std::string& name, const Aggregate& a) {
        std::snprintf(line, sizeof line, "%-10s %6s %6s %9s %15s %10s %6zu\n", name.c_str(), cell(a.ir).c_str(),
                      cell(a.as).c_str(), cell(a.clip_sim).c_str(), cell(a.local_clip_sim).c_str(),
                      cell(a.gdino_acc).c_str(), a.count);
        out += line;
    };
    std::snprintf(line, sizeof line, "%-10s %6s %6s %9s %15s %10s %6s\n", "", "IR", "AS", "CLIP Sim", "Local CLIP Sim",
                  "Gdino Acc", "N");
    out += line;
    row("overall", report.overall);
    for (const auto& [category, agg] : report.by_category) {
        row(category, agg);
    }
    return out;
}

}  // namespace painter::evalbench
