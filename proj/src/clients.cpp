// Copyright (C) 2026 The Painter Authors
// SPDX-License-Identifier: Apache-2.0

#include "painter/clients.hpp"

#include <httplib.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <json.hpp>
#include <sstream>
#include <thread>

#include "painter/adapters.hpp"
#include "painter/errors.hpp"
#include "painter/image_io.hpp"
#include "painter/synthetic.hpp"

namespace painter::clients {

namespace {

using nlohmann::json;

std::array<double, 3> centered(double r, double g, double b) {
    return {r / 255.0 - 0.5, g / 255.0 - 0.5, b / 255.0 - 0.5};
}

json parse_reply(const std::string& text, const std::string& what) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw ClientError(what + ": malformed reply: " + e.what());
    }
}

template <typename T>
T field(const json& j, const char* key, const std::string& what) {
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ClientError(what + ": bad field '" + key + "': " + e.what());
    }
}

double checked_score(double s, const std::string& what) {
    if (!(s >= -1.0 && s <= 1.0)) {
        throw ClientError(what + ": similarity outside [-1,1]");
    }
    return s;
}

}  // namespace

std::string ColorCaptioner::caption(const RgbImage& crop) const {
    const auto& colors = synthetic::palette();
    std::vector<std::size_t> votes(colors.size(), 0);
    for (std::size_t y = 0; y < crop.height(); ++y) {
        for (std::size_t x = 0; x < crop.width(); ++x) {
            std::size_t best = 0;
            long best_d = -1;
            for (std::size_t k = 0; k < colors.size(); ++k) {
                const long dr = long(crop.at(y, x, 0)) - colors[k].r;
                const long dg = long(crop.at(y, x, 1)) - colors[k].g;
                const long db = long(crop.at(y, x, 2)) - colors[k].b;
                const long d = dr * dr + dg * dg + db * db;
                if (best_d < 0 || d < best_d) {
                    best_d = d;
                    best = k;
                }
            }
            ++votes[best];
        }
    }
    const auto top = std::max_element(votes.begin(), votes.end()) - votes.begin();
    return std::string("a ") + colors[static_cast<std::size_t>(top)].name + " object";
}

std::string TruncatingShortener::shorten(const std::string& caption) const {
    std::istringstream in(caption);
    std::string word;
    std::string out;
    for (std::size_t n = 0; n < m_max && in >> word; ++n) {
        out += (out.empty() ? "" : " ") + word;
    }
    return out.empty() ? caption : out;
}

double ColorSimilarity::score(const RgbImage& image, const std::string& text) const {
    const synthetic::NamedColor* match = nullptr;
    for (const auto& word : adapters::split_words(text)) {
        for (const auto& c : synthetic::palette()) {
            if (word == c.name) {
                match = &c;
                break;
            }
        }
        if (match) {
            break;
        }
    }
    const std::size_t n = image.height() * image.width();
    if (!match || n == 0) {
        return 0.0;
    }
    double sum[3] = {0, 0, 0};
    for (std::size_t p = 0; p < n; ++p) {
        for (std::size_t c = 0; c < 3; ++c) {
            sum[c] += image.data()[p * 3 + c];
        }
    }
    const auto a = centered(sum[0] / n, sum[1] / n, sum[2] / n);
    const auto b = centered(match->r, match->g, match->b);
    const double dot = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    const double na = std::sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2]);
    const double nb = std::sqrt(b[0] * b[0] + b[1] * b[1] + b[2] * b[2]);
    if (na == 0.0 || nb == 0.0) {
        return 0.0;
    }
    return std::clamp(dot / (na * nb), -1.0, 1.0);
}

FixedSimilarity::FixedSimilarity(double value) : m_value(value) {
    if (!(value >= -1.0 && value <= 1.0)) {
        throw DomainError("similarity must lie in [-1,1]");
    }
}

std::vector<Detection> EchoDetector::detect(const RgbImage& image, const std::string& text) const {
    if (image.height() == 0 || image.width() == 0) {
        return {};
    }
    return {{{0, 0, image.height() - 1, image.width() - 1}, text, 1.0}};
}

std::string post_json(const HttpOptions& options, const std::string& path, const std::string& body) {
    httplib::Client client(options.base_url);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(options.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(options.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());
    std::string last_error;
    for (int attempt = 0; attempt <= options.retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(std::chrono::milliseconds(20 * attempt));
        }
        auto res = client.Post(path, body, "application/json");
        if (!res) {
            last_error = httplib::to_string(res.error());
            continue;
        }
        if (res->status == 200) {
            return res->body;
        }
        last_error = "HTTP " + std::to_string(res->status);
        if (res->status < 500) {
            break;
        }
    }
    throw ClientError(options.base_url + path + ": " + last_error);
}

std::string HttpCaptioner::caption(const RgbImage& crop) const {
    const json req = {{"image", io::base64_encode(io::encode_png(crop))}};
    const auto reply = parse_reply(post_json(m_options, "/caption", req.dump()), "caption");
    return field<std::string>(reply, "caption", "caption");
}

std::string HttpShortener::shorten(const std::string& caption) const {
    const json req = {{"caption", caption}};
    const auto reply = parse_reply(post_json(m_options, "/shorten", req.dump()), "shorten");
    return field<std::string>(reply, "caption", "shorten");
}

double HttpSimilarity::score(const RgbImage& image, const std::string& text) const {
    const json req = {{"image", io::base64_encode(io::encode_png(image))}, {"text", text}};
    const auto reply = parse_reply(post_json(m_options, "/similarity", req.dump()), "similarity");
    return checked_score(field<double>(reply, "score", "similarity"), "similarity");
}

std::vector<Detection> HttpDetector::detect(const RgbImage& image, const std::string& text) const {
    const json req = {{"image", io::base64_encode(io::encode_png(image))}, {"text", text}};
    const auto reply = parse_reply(post_json(m_options, "/detect", req.dump()), "detect");
    std::vector<Detection> out;
    for (const auto& d : field<json>(reply, "detections", "detect")) {
        const auto box = field<std::vector<std::size_t>>(d, "box", "detect");
        if (box.size() != 4) {
            throw ClientError("detect: box needs four coordinates");
        }
        Detection det{{box[0], box[1], box[2], box[3]}, field<std::string>(d, "phrase", "detect"),
                      field<double>(d, "confidence", "detect")};
        if (!(det.confidence >= 0.0 && det.confidence <= 1.0)) {
            throw ClientError("detect: confidence outside [0,1]");
        }
        out.push_back(std::move(det));
    }
    return out;
}

double HttpScorer::score(const RgbImage& image, const std::string& prompt) const {
    const json req = {{"image", io::base64_encode(io::encode_png(image))}, {"prompt", prompt}};
    const auto reply = parse_reply(post_json(m_options, "/score", req.dump()), "score");
    return field<double>(reply, "score", "score");
}

}  // namespace painter::clients
