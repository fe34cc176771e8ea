// Copyright (C) 2026 The Painter Authors
// SPDX-License-Identifier: Apache-2.0

#include "painter/image_io.hpp"

#include <openssl/evp.h>
#include <png.h>

#include <cstring>
#include <fstream>
#include <iterator>

#include "painter/errors.hpp"

namespace painter::io {

namespace {

struct ReadCursor {
    const Bytes* bytes;
    std::size_t offset;
};

void png_read_from_memory(png_structp png, png_bytep out, png_size_t length) {
    auto* cursor = static_cast<ReadCursor*>(png_get_io_ptr(png));
    if (cursor->offset + length > cursor->bytes->size()) {
        png_error(png, "truncated PNG stream");
    }
    std::memcpy(out, cursor->bytes->data() + cursor->offset, length);
    cursor->offset += length;
}

void png_write_to_memory(png_structp png, png_bytep data, png_size_t length) {
    auto* out = static_cast<Bytes*>(png_get_io_ptr(png));
    out->insert(out->end(), data, data + length);
}

void png_flush_noop(png_structp) {}

void png_error_throw(png_structp, png_const_charp message) {
    throw IoError(std::string("png: ") + message);
}

void png_warning_ignore(png_structp, png_const_charp) {}

// Encodes 8-bit rows with `channels` interleaved samples (1 = gray, 3 = RGB).
Bytes encode_rows(const std::uint8_t* data, std::size_t height, std::size_t width, int channels) {
    Bytes out;
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_throw, png_warning_ignore);
    if (!png) {
        throw IoError("png: cannot allocate writer");
    }
    png_infop info = png_create_info_struct(png);
    try {
        png_set_write_fn(png, &out, png_write_to_memory, png_flush_noop);
        png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8,
                     channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
                     PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
        png_write_info(png, info);
        for (std::size_t y = 0; y < height; ++y) {
            png_write_row(png, const_cast<png_bytep>(data + y * width * channels));
        }
        png_write_end(png, nullptr);
    } catch (...) {
        png_destroy_write_struct(&png, &info);
        throw;
    }
    png_destroy_write_struct(&png, &info);
    return out;
}

struct DecodedPng {
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<std::uint8_t> data;
};

// Decodes to 8-bit samples, RGB or gray depending on `want_rgb`.
DecodedPng decode_rows(const Bytes& bytes, bool want_rgb) {
    if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) {
        throw IoError("png: not a PNG stream");
    }
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_throw, png_warning_ignore);
    if (!png) {
        throw IoError("png: cannot allocate reader");
    }
    png_infop info = png_create_info_struct(png);
    ReadCursor cursor{&bytes, 0};
    DecodedPng out;
    try {
        png_set_read_fn(png, &cursor, png_read_from_memory);
        png_read_info(png, info);
        const auto color = png_get_color_type(png, info);
        const auto depth = png_get_bit_depth(png, info);
        if (depth == 16) {
            png_set_strip_16(png);
        }
        if (color == PNG_COLOR_TYPE_PALETTE) {
            png_set_palette_to_rgb(png);
        }
        if (color == PNG_COLOR_TYPE_GRAY && depth < 8) {
            png_set_expand_gray_1_2_4_to_8(png);
        }
        if (png_get_valid(png, info, PNG_INFO_tRNS)) {
            png_set_tRNS_to_alpha(png);
        }
        if (color & PNG_COLOR_MASK_ALPHA || png_get_valid(png, info, PNG_INFO_tRNS)) {
            png_set_strip_alpha(png);
        }
        const bool source_color = (color & PNG_COLOR_MASK_COLOR) || color == PNG_COLOR_TYPE_PALETTE;
        if (want_rgb && !source_color) {
            png_set_gray_to_rgb(png);
        }
        if (!want_rgb && source_color) {
            png_set_rgb_to_gray_fixed(png, 1, -1, -1);
        }
        png_read_update_info(png, info);
        out.width = png_get_image_width(png, info);
        out.height = png_get_image_height(png, info);
        const std::size_t rowbytes = png_get_rowbytes(png, info);
        const std::size_t channels = want_rgb ? 3 : 1;
        if (rowbytes != out.width * channels) {
            throw IoError("png: unexpected row layout");
        }
        out.data.resize(out.height * rowbytes);
        std::vector<png_bytep> rows(out.height);
        for (std::size_t y = 0; y < out.height; ++y) {
            rows[y] = out.data.data() + y * rowbytes;
        }
        png_read_image(png, rows.data());
        png_read_end(png, nullptr);
    } catch (...) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw;
    }
    png_destroy_read_struct(&png, &info, nullptr);
    return out;
}

}  // namespace

Bytes encode_png(const RgbImage& image) {
    return encode_rows(image.data().data(), image.height(), image.width(), 3);
}

Bytes encode_png(const BinaryMask& mask) {
    std::vector<std::uint8_t> gray(mask.size());
    for (std::size_t i = 0; i < gray.size(); ++i) {
        gray[i] = mask.pixels()[i] ? 255 : 0;
    }
    return encode_rows(gray.data(), mask.height(), mask.width(), 1);
}

RgbImage decode_png_rgb(const Bytes& png) {
    auto decoded = decode_rows(png, true);
    return RgbImage(decoded.height, decoded.width, std::move(decoded.data));
}

BinaryMask decode_png_mask(const Bytes& png) {
    auto decoded = decode_rows(png, false);
    for (auto& v : decoded.data) {
        v = v >= 128 ? 1 : 0;
    }
    return BinaryMask(decoded.height, decoded.width, std::move(decoded.data));
}

RgbImage read_png_rgb(const std::filesystem::path& path) {
    return decode_png_rgb(read_file(path));
}

BinaryMask read_png_mask(const std::filesystem::path& path) {
    return decode_png_mask(read_file(path));
}

void write_png(const std::filesystem::path& path, const RgbImage& image) {
    write_file(path, encode_png(image));
}

void write_png(const std::filesystem::path& path, const BinaryMask& mask) {
    write_file(path, encode_png(mask));
}

Bytes read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::filesystem::path& path, const Bytes& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw IoError("short write to " + path.string());
    }
}

void write_file(const std::filesystem::path& path, std::string_view text) {
    write_file(path, Bytes(text.begin(), text.end()));
}

std::string base64_encode(const Bytes& bytes) {
    std::string out(4 * ((bytes.size() + 2) / 3), '\0');
    const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(),
                                  static_cast<int>(bytes.size()));
    out.resize(static_cast<std::size_t>(n));
    return out;
}

Bytes base64_decode(std::string_view text) {
    // Tolerate data URLs from browsers.
    if (auto comma = text.find(','); text.substr(0, 5) == "data:" && comma != std::string_view::npos) {
        text.remove_prefix(comma + 1);
    }
    if (text.size() % 4 != 0) {
        throw IoError("base64: length is not a multiple of 4");
    }
    Bytes out(3 * text.size() / 4);
    const int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(text.data()),
                                  static_cast<int>(text.size()));
    if (n < 0) {
        throw IoError("base64: invalid input");
    }
    std::size_t padding = 0;
    if (!text.empty() && text.back() == '=') {
        ++padding;
        if (text.size() > 1 && text[text.size() - 2] == '=') {
            ++padding;
        }
    }
    out.resize(static_cast<std::size_t>(n) - padding);
    return out;
}

}  // namespace painter::io
