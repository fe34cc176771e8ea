// Copyright (C) 2026 The Painter Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <map>
#include <string>
#include <vector>

#include "painter/raster.hpp"

namespace painter::clients {

class CaptionerClient {
public:
    virtual ~CaptionerClient() = default;
    virtual std::string caption(const RgbImage& crop) const = 0;
};

class ShortenerClient {
public:
    virtual ~ShortenerClient() = default;
    virtual std::string shorten(const std::string& caption) const = 0;
};

/// Cosine similarity in [-1,1] between an image and a text.
class SimilarityClient {
public:
    virtual ~SimilarityClient() = default;
    virtual double score(const RgbImage& image, const std::string& text) const = 0;
};

struct Detection {
    Box box;
    std::string phrase;
    double confidence = 0.0;
};

class DetectorClient {
public:
    virtual ~DetectorClient() = default;
    virtual std::vector<Detection> detect(const RgbImage& image, const std::string& text) const = 0;
};

/// Optional per-image quality scorer (reward or aesthetic models).
class ImageScorer {
public:
    virtual ~ImageScorer() = default;
    virtual double score(const RgbImage& image, const std::string& prompt) const = 0;
};

// Offline stubs. All are pure and thread-safe.

/// "a <color> object", naming the palette color nearest to most pixels.
class ColorCaptioner final : public CaptionerClient {
public:
    std::string caption(const RgbImage& crop) const override;
};

class IdentityShortener final : public ShortenerClient {
public:
    std::string shorten(const std::string& caption) const override { return caption; }
};

/// Keeps the first `max_words` whitespace-separated words.
class TruncatingShortener final : public ShortenerClient {
public:
    explicit TruncatingShortener(std::size_t max_words) : m_max(max_words) {}
    std::string shorten(const std::string& caption) const override;

private:
    std::size_t m_max;
};

/// Cosine between the centered mean image color and the centered palette
/// color of the first color word in the text; 0 when no color word appears.
class ColorSimilarity final : public SimilarityClient {
public:
    double score(const RgbImage& image, const std::string& text) const override;
};

class FixedSimilarity final : public SimilarityClient {
public:
    explicit FixedSimilarity(double value);
    double score(const RgbImage&, const std::string&) const override { return m_value; }

private:
    double m_value;
};

/// One full-frame detection whose phrase is the query text, confidence 1.
class EchoDetector final : public DetectorClient {
public:
    std::vector<Detection> detect(const RgbImage& image, const std::string& text) const override;
};

class EmptyDetector final : public DetectorClient {
public:
    std::vector<Detection> detect(const RgbImage&, const std::string&) const override { return {}; }
};

// HTTP/JSON clients. Images travel as base64 PNG.
//   POST <base>/caption    {"image"}          -> {"caption"}
//   POST <base>/shorten    {"caption"}        -> {"caption"}
//   POST <base>/similarity {"image","text"}   -> {"score"}
//   POST <base>/detect     {"image","text"}   -> {"detections":[{"box":[y0,x0,y1,x1],"phrase","confidence"}]}
//   POST <base>/score      {"image","prompt"} -> {"score"}
// Transport errors and 5xx responses are retried; anything else fails at once.

struct HttpOptions {
    std::string base_url;  // e.g. "http://127.0.0.1:9000"
    std::chrono::milliseconds timeout{30000};
    int retries = 3;
};

/// POSTs `body` to `path`, returning the parsed JSON text of a 200 reply.
/// Throws ClientError after the retry budget is exhausted.
std::string post_json(const HttpOptions& options, const std::string& path, const std::string& body);

class HttpCaptioner final : public CaptionerClient {
public:
    explicit HttpCaptioner(HttpOptions options) : m_options(std::move(options)) {}
    std::string caption(const RgbImage& crop) const override;

private:
    HttpOptions m_options;
};

class HttpShortener final : public ShortenerClient {
public:
    explicit HttpShortener(HttpOptions options) : m_options(std::move(options)) {}
    std::string shorten(const std::string& caption) const override;

private:
    HttpOptions m_options;
};

class HttpSimilarity final : public SimilarityClient {
public:
    explicit HttpSimilarity(HttpOptions options) : m_options(std::move(options)) {}
    double score(const RgbImage& image, const std::string& text) const override;

private:
    HttpOptions m_options;
};

class HttpDetector final : public DetectorClient {
public:
    explicit HttpDetector(HttpOptions options) : m_options(std::move(options)) {}
    std::vector<Detection> detect(const RgbImage& image, const std::string& text) const override;

private:
    HttpOptions m_options;
};

class HttpScorer final : public ImageScorer {
public:
    explicit HttpScorer(HttpOptions options) : m_options(std::move(options)) {}
    double score(const RgbImage& image, const std::string& prompt) const override;

private:
    HttpOptions m_options;
};

}  // namespace painter::clients
