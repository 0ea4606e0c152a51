#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "meshtex/image.hpp"
#include "meshtex/mesh.hpp"

namespace meshtex {

using RgbaImage = Image<std::uint8_t, 4>;

enum class TexelStatus : std::uint8_t { unseen = 0, generated = 1, refined = 2 };

/// UV-space texture being built up view by view. Row 0 is the top of the
/// image, i.e. v = 1; u grows with the column index.
///
/// Invariant: status == unseen <=> alpha == 0 <=> score == 0.
class TextureAtlas {
public:
    TextureAtlas() = default;
    TextureAtlas(int width, int height)
        : color_(width, height, 0),
          score_(static_cast<std::size_t>(width) * height, 0.0),
          status_(static_cast<std::size_t>(width) * height, TexelStatus::unseen) {}

    /// Fully seen atlas carrying `img` (status generated, score 1).
    static TextureAtlas from_image(const RgbImage& img) {
        TextureAtlas atlas(img.width(), img.height());
        for (int y = 0; y < img.height(); ++y)
            for (int x = 0; x < img.width(); ++x)
                atlas.write(x, y, {img.at(x, y, 0), img.at(x, y, 1), img.at(x, y, 2)}, 1.0, TexelStatus::generated);
        return atlas;
    }

    int width() const noexcept { return color_.width(); }
    int height() const noexcept { return color_.height(); }
    std::size_t texel_count() const noexcept { return score_.size(); }

    /// Texel containing `uv`; coordinates outside [0,1] clamp to the border.
    std::pair<int, int> texel_of(const Vec2& uv) const {
        const int x = std::clamp(static_cast<int>(std::floor(uv.x() * width())), 0, width() - 1);
        const int y = std::clamp(static_cast<int>(std::floor((1.0 - uv.y()) * height())), 0, height() - 1);
        return {x, y};
    }

    Vec2 texel_center_uv(int x, int y) const {
        return {(x + 0.5) / width(), 1.0 - (y + 0.5) / height()};
    }

    /// Continuous pixel coordinates of `uv` in the atlas image.
    std::pair<double, double> uv_to_pixel(const Vec2& uv) const {
        return {uv.x() * width(), (1.0 - uv.y()) * height()};
    }

    Rgb rgb(int x, int y) const { return {color_.at(x, y, 0), color_.at(x, y, 1), color_.at(x, y, 2)}; }
    std::uint8_t alpha(int x, int y) const { return color_.at(x, y, 3); }
    double score(int x, int y) const { return score_[idx(x, y)]; }
    TexelStatus status(int x, int y) const { return status_[idx(x, y)]; }
    bool seen(int x, int y) const { return status(x, y) != TexelStatus::unseen; }

    /// `score` must be in (0, 1]; the texel becomes seen.
    void write(int x, int y, const Rgb& c, double score, TexelStatus st) {
        for (int k = 0; k < 3; ++k) color_.at(x, y, k) = c[k];
        color_.at(x, y, 3) = 255;
        score_[idx(x, y)] = score;
        status_[idx(x, y)] = st;
    }

    const RgbaImage& rgba() const noexcept { return color_; }

    RgbImage rgb_image() const {
        RgbImage out(width(), height());
        for (int y = 0; y < height(); ++y)
            for (int x = 0; x < width(); ++x)
                for (int k = 0; k < 3; ++k) out.at(x, y, k) = color_.at(x, y, k);
        return out;
    }

    std::size_t seen_count() const {
        return static_cast<std::size_t>(
            std::count_if(status_.begin(), status_.end(), [](TexelStatus s) { return s != TexelStatus::unseen; }));
    }

    friend bool operator==(const TextureAtlas& a, const TextureAtlas& b) {
        return a.color_ == b.color_ && a.score_ == b.score_ && a.status_ == b.status_;
    }

private:
    std::size_t idx(int x, int y) const noexcept { return static_cast<std::size_t>(y) * width() + x; }

    RgbaImage color_;
    std::vector<double> score_;
    std::vector<TexelStatus> status_;
};

}  // namespace meshtex
