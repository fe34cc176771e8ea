// Copyright (C) 2026 The Painter Authors
// SPDX-License-Identifier: Apache-2.0

#include "painter/adapters.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <random>

#include "painter/errors.hpp"

namespace painter::adapters {

namespace {

std::uint64_t fnv1a(std::string_view text) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace

std::vector<std::string> split_words(std::string_view text) {
    std::vector<std::string> words;
    std::string current;
    for (unsigned char c : text) {
        if (std::isalnum(c) || c >= 0x80) {
            current.push_back(static_cast<char>(std::tolower(c)));
        } else if (!current.empty()) {
            words.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) {
        words.push_back(std::move(current));
    }
    return words;
}

Tokenizer::Tokenizer(std::size_t vocab_size, std::size_t length) : m_vocab(vocab_size), m_length(length) {
    if (vocab_size < 4 || length < 2) {
        throw DomainError("tokenizer needs vocab >= 4 and length >= 2");
    }
}

int Tokenizer::token_id(std::string_view word) const {
    return 3 + static_cast<int>(fnv1a(word) % (m_vocab - 3));
}

TokenizedPrompt Tokenizer::tokenize(std::string_view text) const {
    TokenizedPrompt out;
    out.ids.assign(m_length, kPadToken);
    out.ids[0] = kStartToken;
    const auto words = split_words(text);
    const std::size_t kept = std::min(words.size(), m_length - 2);
    for (std::size_t i = 0; i < kept; ++i) {
        out.ids[i + 1] = token_id(words[i]);
    }
    out.ids[kept + 1] = kEndToken;
    out.actual_len = kept + 2;
    return out;
}

TextEncoder::TextEncoder(TextEncoderConfig config)
    : m_config(config), m_tokenizer(config.vocab_size, config.length) {
    std::mt19937_64 rng(config.seed);
    m_table = nn::Tensor::randn({config.vocab_size, config.dim}, rng, 1.0);
    m_positions = nn::Tensor({config.length, config.dim});
    for (std::size_t p = 0; p < config.length; ++p) {
        for (std::size_t d = 0; d < config.dim; ++d) {
            const double freq = std::pow(10000.0, -static_cast<double>(d / 2 * 2) / static_cast<double>(config.dim));
            const double angle = static_cast<double>(p) * freq;
            m_positions[p * config.dim + d] = 0.1 * (d % 2 == 0 ? std::sin(angle) : std::cos(angle));
        }
    }
}

nn::Tensor TextEncoder::encode(const TokenizedPrompt& prompt) const {
    const std::size_t len = m_config.length;
    const std::size_t dim = m_config.dim;
    if (prompt.ids.size() != len) {
        throw ShapeError("token sequence length " + std::to_string(prompt.ids.size()) + " != " + std::to_string(len));
    }
    nn::Tensor out({len, dim});
    for (std::size_t p = 0; p < len; ++p) {
        const auto id = static_cast<std::size_t>(prompt.ids[p]);
        if (id >= m_config.vocab_size) {
            throw DomainError("token id out of vocabulary");
        }
        for (std::size_t d = 0; d < dim; ++d) {
            out[p * dim + d] = m_table[id * dim + d] + m_positions[p * dim + d];
        }
    }
    return out;
}

LatentCodec::LatentCodec(std::size_t factor) : m_factor(factor) {
    if (factor == 0) {
        throw DomainError("latent factor must be positive");
    }
}

nn::Tensor LatentCodec::encode(const nn::Tensor& image) const {
    if (image.rank() != 3 || image.dim(0) != 3) {
        throw ShapeError("codec expects a 3×H×W image, got " + nn::shape_string(image.shape()));
    }
    const std::size_t h = image.dim(1);
    const std::size_t w = image.dim(2);
    if (h % m_factor || w % m_factor) {
        throw ShapeError("image " + std::to_string(h) + "x" + std::to_string(w) + " is not a multiple of the latent factor " +
                         std::to_string(m_factor));
    }
    const std::size_t lh = h / m_factor;
    const std::size_t lw = w / m_factor;
    const double inv_area = 1.0 / static_cast<double>(m_factor * m_factor);
    nn::Tensor latent({latent_channels, lh, lw});
    for (std::size_t c = 0; c < 3; ++c) {
        for (std::size_t y = 0; y < lh; ++y) {
            for (std::size_t x = 0; x < lw; ++x) {
                double total = 0.0;
                for (std::size_t dy = 0; dy < m_factor; ++dy) {
                    for (std::size_t dx = 0; dx < m_factor; ++dx) {
                        total += image[(c * h + y * m_factor + dy) * w + x * m_factor + dx];
                    }
                }
                latent[(c * lh + y) * lw + x] = total * inv_area;
            }
        }
    }
    return latent;
}

nn::Tensor LatentCodec::decode(const nn::Tensor& latent) const {
    if (latent.rank() != 3 || latent.dim(0) != latent_channels) {
        throw ShapeError("codec expects a 4×h×w latent, got " + nn::shape_string(latent.shape()));
    }
    const std::size_t lh = latent.dim(1);
    const std::size_t lw = latent.dim(2);
    const std::size_t h = lh * m_factor;
    const std::size_t w = lw * m_factor;
    nn::Tensor image({3, h, w});
    for (std::size_t c = 0; c < 3; ++c) {
        for (std::size_t y = 0; y < h; ++y) {
            for (std::size_t x = 0; x < w; ++x) {
                image[(c * h + y) * w + x] = latent[(c * lh + y / m_factor) * lw + x / m_factor];
            }
        }
    }
    return image;
}

nn::Tensor image_to_tensor(const RgbImage& image) {
    const std::size_t h = image.height();
    const std::size_t w = image.width();
    nn::Tensor out({3, h, w});
    for (std::size_t c = 0; c < 3; ++c) {
        for (std::size_t y = 0; y < h; ++y) {
            for (std::size_t x = 0; x < w; ++x) {
                out[(c * h + y) * w + x] = static_cast<double>(image.at(y, x, c)) / 127.5 - 1.0;
            }
        }
    }
    return out;
}

RgbImage tensor_to_image(const nn::Tensor& tensor) {
    if (tensor.rank() != 3 || tensor.dim(0) != 3) {
        throw ShapeError("expected a 3×H×W tensor, got " + nn::shape_string(tensor.shape()));
    }
    const std::size_t h = tensor.dim(1);
    const std::size_t w = tensor.dim(2);
    RgbImage out(h, w);
    for (std::size_t c = 0; c < 3; ++c) {
        for (std::size_t y = 0; y < h; ++y) {
            for (std::size_t x = 0; x < w; ++x) {
                const double v = (tensor[(c * h + y) * w + x] + 1.0) * 127.5;
                const double clamped = std::isfinite(v) ? std::clamp(std::round(v), 0.0, 255.0) : 0.0;
                out.at(y, x, c) = static_cast<std::uint8_t>(clamped);
            }
        }
    }
    return out;
}

}  // namespace painter::adapters
