#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace meshtex {

struct DimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Dense interleaved image. `Tag` separates semantically distinct images
/// (edge maps, masks) that share a pixel layout.
template <class T, int Channels, class Tag = void>
class Image {
public:
    using value_type = T;
    static constexpr int channels = Channels;

    Image() = default;
    Image(int width, int height, T fill = T{})
        : width_(checked(width)), height_(checked(height)),
          data_(static_cast<std::size_t>(width) * height * Channels, fill) {}

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t pixel_count() const noexcept { return static_cast<std::size_t>(width_) * height_; }
    bool empty() const noexcept { return data_.empty(); }
    bool contains(int x, int y) const noexcept { return x >= 0 && y >= 0 && x < width_ && y < height_; }

    T& at(int x, int y, int c = 0) { return data_[index(x, y, c)]; }
    const T& at(int x, int y, int c = 0) const { return data_[index(x, y, c)]; }

    std::array<T, Channels> pixel(int x, int y) const {
        std::array<T, Channels> px;
        for (int c = 0; c < Channels; ++c) px[c] = at(x, y, c);
        return px;
    }
    void set_pixel(int x, int y, const std::array<T, Channels>& px) {
        for (int c = 0; c < Channels; ++c) at(x, y, c) = px[c];
    }

    std::vector<T>& data() noexcept { return data_; }
    const std::vector<T>& data() const noexcept { return data_; }

    bool same_size(int w, int h) const noexcept { return width_ == w && height_ == h; }
    template <class U, int C2, class Tag2>
    bool same_size(const Image<U, C2, Tag2>& o) const noexcept {
        return same_size(o.width(), o.height());
    }

    friend bool operator==(const Image& a, const Image& b) {
        return a.width_ == b.width_ && a.height_ == b.height_ && a.data_ == b.data_;
    }

private:
    static int checked(int extent) {
        if (extent < 0) throw DimensionError("negative image dimensions");
        return extent;
    }

    std::size_t index(int x, int y, int c) const noexcept {
        return (static_cast<std::size_t>(y) * width_ + x) * Channels + c;
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<T> data_;
};

struct BinaryTag {};

using Rgb = std::array<std::uint8_t, 3>;
using RgbImage = Image<std::uint8_t, 3>;
using GrayImage = Image<std::uint8_t, 1>;
/// Single-channel image holding only 0 or 255.
using BinaryImage = Image<std::uint8_t, 1, BinaryTag>;
using EdgeMap = BinaryImage;

inline constexpr Rgb kWhite{255, 255, 255};

/// Rec. 601 luma, rounded to nearest. Integer weights sum to 1000 so the
/// result is exact and platform independent.
inline std::uint8_t luma601(std::uint8_t r, std::uint8_t g, std::uint8_t b) noexcept {
    const int y = 299 * r + 587 * g + 114 * b;
    return static_cast<std::uint8_t>((y + 500) / 1000);
}

inline GrayImage to_gray(const RgbImage& img) {
    GrayImage out(img.width(), img.height());
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x)
            out.at(x, y) = luma601(img.at(x, y, 0), img.at(x, y, 1), img.at(x, y, 2));
    return out;
}

inline GrayImage to_gray(const BinaryImage& img) {
    GrayImage out(img.width(), img.height());
    out.data() = img.data();
    return out;
}

/// Any nonzero value becomes 255.
inline BinaryImage to_binary(const GrayImage& img) {
    BinaryImage out(img.width(), img.height());
    for (std::size_t i = 0; i < img.data().size(); ++i) out.data()[i] = img.data()[i] ? 255 : 0;
    return out;
}

inline RgbImage gray_to_rgb(const GrayImage& img) {
    RgbImage out(img.width(), img.height());
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x)
            for (int c = 0; c < 3; ++c) out.at(x, y, c) = img.at(x, y);
    return out;
}

inline std::size_t count_nonzero(const BinaryImage& img) {
    return static_cast<std::size_t>(
        std::count_if(img.data().begin(), img.data().end(), [](std::uint8_t v) { return v != 0; }));
}

/// Bilinear sample with texel centers at integer + 0.5 and clamp-to-edge
/// addressing. (px, py) are continuous pixel coordinates.
template <class Tag>
std::array<double, 3> sample_bilinear(const Image<std::uint8_t, 3, Tag>& img, double px, double py) {
    const double fx = px - 0.5;
    const double fy = py - 0.5;
    const double x0f = std::floor(fx);
    const double y0f = std::floor(fy);
    const double tx = fx - x0f;
    const double ty = fy - y0f;
    const auto clampi = [](int v, int hi) { return std::clamp(v, 0, hi - 1); };
    const int x0 = clampi(static_cast<int>(x0f), img.width());
    const int x1 = clampi(static_cast<int>(x0f) + 1, img.width());
    const int y0 = clampi(static_cast<int>(y0f), img.height());
    const int y1 = clampi(static_cast<int>(y0f) + 1, img.height());
    std::array<double, 3> out{};
    for (int c = 0; c < 3; ++c) {
        const double top = (1 - tx) * img.at(x0, y0, c) + tx * img.at(x1, y0, c);
        const double bot = (1 - tx) * img.at(x0, y1, c) + tx * img.at(x1, y1, c);
        out[c] = (1 - ty) * top + ty * bot;
    }
    return out;
}

inline std::uint8_t to_u8(double v) noexcept {
    return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

/// Bilinear resize; used to bring reference images to view resolution.
inline RgbImage resize_bilinear(const RgbImage& src, int width, int height) {
    if (src.empty()) throw DimensionError("cannot resize an empty image");
    RgbImage out(width, height);
    const double sx = static_cast<double>(src.width()) / width;
    const double sy = static_cast<double>(src.height()) / height;
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            const auto c = sample_bilinear(src, (x + 0.5) * sx, (y + 0.5) * sy);
            for (int k = 0; k < 3; ++k) out.at(x, y, k) = to_u8(c[k]);
        }
    return out;
}

}  // namespace meshtex
