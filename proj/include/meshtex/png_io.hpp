#pragma once

// PNG encode/decode through libpng. Encoding uses fixed zlib settings and a
// fixed row filter so identical images produce identical bytes.

#include <png.h>

#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <stdexcept>
#include <string>
#include <vector>

#include "meshtex/image.hpp"

namespace meshtex {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

struct PngWriteBuffer {
    std::vector<std::uint8_t> bytes;
};

inline void png_write_to_vector(png_structp png, png_bytep data, png_size_t len) {
    auto* buf = static_cast<PngWriteBuffer*>(png_get_io_ptr(png));
    buf->bytes.insert(buf->bytes.end(), data, data + len);
}

inline void png_flush_noop(png_structp) {}

[[noreturn]] inline void png_throw(png_structp, png_const_charp msg) { throw IoError(std::string("png: ") + msg); }

inline void png_warn_ignore(png_structp, png_const_charp) {}

inline std::vector<std::uint8_t> encode_png_raw(const std::uint8_t* pixels, int width, int height, int channels) {
    if (width <= 0 || height <= 0) throw IoError("png: cannot encode an empty image");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_throw, png_warn_ignore);
    if (!png) throw IoError("png: out of memory");
    png_infop info = png_create_info_struct(png);
    PngWriteBuffer buf;
    try {
        if (!info) throw IoError("png: out of memory");
        png_set_write_fn(png, &buf, png_write_to_vector, png_flush_noop);
        const int color = channels == 1 ? PNG_COLOR_TYPE_GRAY
                          : channels == 3 ? PNG_COLOR_TYPE_RGB
                                          : PNG_COLOR_TYPE_RGBA;
        png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8, color,
                     PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
        png_set_filter(png, PNG_FILTER_TYPE_BASE, PNG_FILTER_UP);
        png_set_compression_level(png, 6);
        png_write_info(png, info);
        const std::size_t stride = static_cast<std::size_t>(width) * channels;
        for (int y = 0; y < height; ++y)
            png_write_row(png, const_cast<png_bytep>(pixels + stride * y));
        png_write_end(png, nullptr);
    } catch (...) {
        png_destroy_write_struct(&png, &info);
        throw;
    }
    png_destroy_write_struct(&png, &info);
    return std::move(buf.bytes);
}

struct PngReadCursor {
    const std::uint8_t* data;
    std::size_t size;
    std::size_t pos;
};

inline void png_read_from_memory(png_structp png, png_bytep out, png_size_t len) {
    auto* cur = static_cast<PngReadCursor*>(png_get_io_ptr(png));
    if (cur->pos + len > cur->size) png_error(png, "truncated data");
    std::memcpy(out, cur->data + cur->pos, len);
    cur->pos += len;
}

/// Decodes any 8/16-bit PNG, converted to the requested channel count.
inline std::vector<std::uint8_t> decode_png_raw(const std::vector<std::uint8_t>& bytes, int channels, int& width,
                                                int& height) {
    if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) throw IoError("png: bad signature");
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_throw, png_warn_ignore);
    if (!png) throw IoError("png: out of memory");
    png_infop info = png_create_info_struct(png);
    PngReadCursor cur{bytes.data(), bytes.size(), 0};
    std::vector<std::uint8_t> out;
    try {
        if (!info) throw IoError("png: out of memory");
        png_set_read_fn(png, &cur, png_read_from_memory);
        png_read_info(png, info);
        const int color = png_get_color_type(png, info);
        const int depth = png_get_bit_depth(png, info);
        if (depth == 16) png_set_strip_16(png);
        if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
        if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
        if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
        const bool src_gray = color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA;
        if (channels == 1) {
            if (!src_gray) png_set_rgb_to_gray_fixed(png, 1, -1, -1);
            png_set_strip_alpha(png);
        } else {
            if (src_gray) png_set_gray_to_rgb(png);
            if (channels == 3) png_set_strip_alpha(png);
            else png_set_add_alpha(png, 0xff, PNG_FILLER_AFTER);
        }
        png_read_update_info(png, info);
        width = static_cast<int>(png_get_image_width(png, info));
        height = static_cast<int>(png_get_image_height(png, info));
        const std::size_t stride = png_get_rowbytes(png, info);
        if (stride != static_cast<std::size_t>(width) * channels) throw IoError("png: unexpected row layout");
        out.resize(stride * height);
        std::vector<png_bytep> rows(height);
        for (int y = 0; y < height; ++y) rows[y] = out.data() + stride * y;
        png_read_image(png, rows.data());
        png_read_end(png, nullptr);
    } catch (...) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw;
    }
    png_destroy_read_struct(&png, &info, nullptr);
    return out;
}

}  // namespace detail

template <int C, class Tag>
std::vector<std::uint8_t> encode_png(const Image<std::uint8_t, C, Tag>& img) {
    return detail::encode_png_raw(img.data().data(), img.width(), img.height(), C);
}

template <class ImageT>
ImageT decode_png(const std::vector<std::uint8_t>& bytes) {
    int w = 0, h = 0;
    auto raw = detail::decode_png_raw(bytes, ImageT::channels, w, h);
    ImageT img(w, h);
    img.data() = std::move(raw);
    return img;
}

inline std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed: " + path);
}

template <int C, class Tag>
void write_png(const std::string& path, const Image<std::uint8_t, C, Tag>& img) {
    write_file_bytes(path, encode_png(img));
}

template <class ImageT>
ImageT read_png(const std::string& path) {
    return decode_png<ImageT>(read_file_bytes(path));
}

}  // namespace meshtex
