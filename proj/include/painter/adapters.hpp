// Copyright (C) 2026 The Painter Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "painter/raster.hpp"
#include "painter/tensor.hpp"

namespace painter::adapters {

inline constexpr int kPadToken = 0;
inline constexpr int kStartToken = 1;
inline constexpr int kEndToken = 2;

/// Fixed-length token sequence: [SOT, words..., EOT, PAD...].
struct TokenizedPrompt {
    std::vector<int> ids;
    std::size_t actual_len = 0;  // SOT and EOT included
};

/// Lower-cases ASCII, splits on anything that is not alphanumeric (bytes
/// >= 0x80 stay inside words).
std::vector<std::string> split_words(std::string_view text);

/// Hashing word-level tokenizer with CLIP-style framing and truncation.
class Tokenizer {
public:
    Tokenizer(std::size_t vocab_size, std::size_t length);

    TokenizedPrompt tokenize(std::string_view text) const;
    int token_id(std::string_view word) const;

    std::size_t vocab_size() const { return m_vocab; }
    std::size_t length() const { return m_length; }

private:
    std::size_t m_vocab;
    std::size_t m_length;
};

struct TextEncoderConfig {
    std::size_t vocab_size = 4096;
    std::size_t length = 77;
    std::size_t dim = 32;
    std::uint64_t seed = 0x7e47;
};

/// Frozen embedding-table text encoder: row j of the output is the token
/// embedding at position j plus a sinusoidal position code. Output is L×dim.
class TextEncoder {
public:
    explicit TextEncoder(TextEncoderConfig config);

    const TextEncoderConfig& config() const { return m_config; }
    const Tokenizer& tokenizer() const { return m_tokenizer; }

    nn::Tensor encode(const TokenizedPrompt& prompt) const;
    nn::Tensor encode(std::string_view text) const { return encode(m_tokenizer.tokenize(text)); }

private:
    TextEncoderConfig m_config;
    Tokenizer m_tokenizer;
    nn::Tensor m_table;      // vocab × dim
    nn::Tensor m_positions;  // length × dim
};

/// Image ↔ latent codec standing in for a VAE.
///
/// encode: each f×f block of the [-1,1] image is averaged per RGB channel into
/// latent channels 0..2; channel 3 is zero. decode: nearest upsampling of
/// channels 0..2. decode(encode(x)) == x for images constant on f×f blocks, and
/// encode(decode(z)) == z for latents with a zero fourth channel.
class LatentCodec {
public:
    explicit LatentCodec(std::size_t factor = 8);

    std::size_t factor() const { return m_factor; }
    static constexpr std::size_t latent_channels = 4;

    /// image: 3×H×W in [-1,1]; H and W must be multiples of factor().
    nn::Tensor encode(const nn::Tensor& image) const;
    nn::Tensor decode(const nn::Tensor& latent) const;

private:
    std::size_t m_factor;
};

/// 8-bit RGB → 3×H×W in [-1,1], and back with rounding and clamping.
nn::Tensor image_to_tensor(const RgbImage& image);
RgbImage tensor_to_image(const nn::Tensor& tensor);

}  // namespace painter::adapters
