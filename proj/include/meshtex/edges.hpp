#pragma once

// Edge conditioning: Canny plus the three geometric edge sources (component
// coloring, depth, normals) and their union.
//
// The Canny pipeline runs in exact integer arithmetic. The Gaussian kernel is
// quantized to integer taps (scale 1024) so that the separable blur equals
// the direct 2-D convolution bit for bit; all later stages work on the scaled
// integers and thresholds are compared against exact squared magnitudes.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "meshtex/image.hpp"
#include "meshtex/mesh.hpp"
#include "meshtex/render.hpp"

namespace meshtex {

struct CannyParams {
    double sigma = 1.4;
    double low = 100.0;   ///< hysteresis thresholds on the 8-bit gradient magnitude scale
    double high = 200.0;

    void validate() const {
        constexpr double kMaxMagnitude = 255.0 * 1.4142135623730951 * 4.0;
        if (!(sigma > 0.0)) throw std::invalid_argument("canny sigma must be positive");
        if (!(low >= 0.0 && low <= high && high <= kMaxMagnitude))
            throw std::invalid_argument("canny thresholds must satisfy 0 <= low <= high <= 255*sqrt(2)*4");
    }
};

/// Integer Gaussian taps for offsets -r..r, r = max(1, ceil(3 sigma)).
inline std::vector<std::int64_t> gaussian_taps(double sigma) {
    const int r = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<double> g(2 * r + 1);
    double sum = 0.0;
    for (int i = -r; i <= r; ++i) sum += g[i + r] = std::exp(-(i * i) / (2.0 * sigma * sigma));
    std::vector<std::int64_t> taps(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) taps[i] = std::llround(1024.0 * g[i] / sum);
    return taps;
}

namespace detail {

struct Gradients {
    int width = 0;
    int height = 0;
    std::vector<std::int64_t> gx, gy, mag2;
    std::int64_t scale2 = 1;  ///< (sum of taps)^2: blurred values carry this factor
};

inline Gradients sobel_of_blur(const GrayImage& img, double sigma) {
    const int w = img.width();
    const int h = img.height();
    const auto taps = gaussian_taps(sigma);
    const int r = static_cast<int>(taps.size() / 2);
    std::int64_t tap_sum = 0;
    for (auto t : taps) tap_sum += t;

    std::vector<std::int64_t> horiz(static_cast<std::size_t>(w) * h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            std::int64_t acc = 0;
            for (int i = -r; i <= r; ++i) acc += taps[i + r] * img.at(std::clamp(x + i, 0, w - 1), y);
            horiz[static_cast<std::size_t>(y) * w + x] = acc;
        }
    std::vector<std::int64_t> blur(horiz.size());
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            std::int64_t acc = 0;
            for (int j = -r; j <= r; ++j) acc += taps[j + r] * horiz[static_cast<std::size_t>(std::clamp(y + j, 0, h - 1)) * w + x];
            blur[static_cast<std::size_t>(y) * w + x] = acc;
        }

    Gradients g;
    g.width = w;
    g.height = h;
    g.scale2 = tap_sum * tap_sum;
    g.gx.resize(blur.size());
    g.gy.resize(blur.size());
    g.mag2.resize(blur.size());
    const auto b = [&](int x, int y) {
        return blur[static_cast<std::size_t>(std::clamp(y, 0, h - 1)) * w + std::clamp(x, 0, w - 1)];
    };
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const std::int64_t gx = (b(x + 1, y - 1) + 2 * b(x + 1, y) + b(x + 1, y + 1)) -
                                    (b(x - 1, y - 1) + 2 * b(x - 1, y) + b(x - 1, y + 1));
            const std::int64_t gy = (b(x - 1, y + 1) + 2 * b(x, y + 1) + b(x + 1, y + 1)) -
                                    (b(x - 1, y - 1) + 2 * b(x, y - 1) + b(x + 1, y - 1));
            const std::size_t i = static_cast<std::size_t>(y) * w + x;
            g.gx[i] = gx;
            g.gy[i] = gy;
            g.mag2[i] = gx * gx + gy * gy;
        }
    return g;
}

enum class Sector { horizontal, vertical, diag_pos, diag_neg };

/// Quantizes the gradient direction into 4 sectors at 22.5 degree boundaries
/// using exact integer tests: |gy| < tan(22.5)|gx| <=> (|gx|+|gy|)^2 < 2 gx^2,
/// |gy| > tan(67.5)|gx| <=> |gy|-|gx| > 0 and (|gy|-|gx|)^2 > 2 gx^2.
inline Sector quantize(std::int64_t gx, std::int64_t gy) {
    using i128 = __int128;
    const i128 ax = gx < 0 ? -gx : gx;
    const i128 ay = gy < 0 ? -gy : gy;
    if ((ax + ay) * (ax + ay) < 2 * ax * ax) return Sector::horizontal;
    if (ay > ax && (ay - ax) * (ay - ax) > 2 * ax * ax) return Sector::vertical;
    return (gx > 0) == (gy > 0) ? Sector::diag_pos : Sector::diag_neg;
}

}  // namespace detail

/// Gaussian blur, Sobel gradients, 4-direction non-maximum suppression and
/// 8-connected double-threshold hysteresis. Borders replicate; neighbours
/// outside the image count as zero magnitude during suppression. A pixel
/// survives suppression when its magnitude is strictly greater than the
/// neighbour on the negative side and not smaller than the one on the
/// positive side, which keeps symmetric ridges one pixel wide.
inline EdgeMap canny(const GrayImage& img, const CannyParams& params) {
    params.validate();
    const int w = img.width();
    const int h = img.height();
    EdgeMap out(w, h, 0);
    if (w == 0 || h == 0) return out;
    const auto g = detail::sobel_of_blur(img, params.sigma);

    const auto mag_at = [&](int x, int y) -> std::int64_t {
        if (x < 0 || y < 0 || x >= w || y >= h) return 0;
        return g.mag2[static_cast<std::size_t>(y) * w + x];
    };
    const long double s2 = static_cast<long double>(g.scale2);
    const long double hi = static_cast<long double>(params.high) * s2;
    const long double lo = static_cast<long double>(params.low) * s2;
    const long double hi2 = hi * hi;
    const long double lo2 = lo * lo;

    // 0 = suppressed, 1 = weak candidate, 2 = strong
    std::vector<std::uint8_t> cls(static_cast<std::size_t>(w) * h, 0);
    std::vector<int> stack;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * w + x;
            const std::int64_t m = g.mag2[i];
            if (m == 0) continue;
            std::int64_t before = 0, after = 0;
            switch (detail::quantize(g.gx[i], g.gy[i])) {
                case detail::Sector::horizontal: before = mag_at(x - 1, y); after = mag_at(x + 1, y); break;
                case detail::Sector::vertical: before = mag_at(x, y - 1); after = mag_at(x, y + 1); break;
                case detail::Sector::diag_pos: before = mag_at(x - 1, y - 1); after = mag_at(x + 1, y + 1); break;
                case detail::Sector::diag_neg: before = mag_at(x - 1, y + 1); after = mag_at(x + 1, y - 1); break;
            }
            if (!(m > before && m >= after)) continue;
            const long double lm = static_cast<long double>(m);
            if (lm > hi2) {
                cls[i] = 2;
                stack.push_back(static_cast<int>(i));
            } else if (lm > lo2) {
                cls[i] = 1;
            }
        }
    while (!stack.empty()) {
        const int i = stack.back();
        stack.pop_back();
        const int x = i % w;
        const int y = i / w;
        out.at(x, y) = 255;
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
                const int nx = x + dx;
                const int ny = y + dy;
                if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
                const std::size_t j = static_cast<std::size_t>(ny) * w + nx;
                if (cls[j] == 1) {
                    cls[j] = 2;
                    stack.push_back(static_cast<int>(j));
                }
            }
    }
    return out;
}

/// Pixelwise maximum of equally sized edge maps.
inline EdgeMap compose_edges(const std::vector<EdgeMap>& maps) {
    if (maps.empty()) throw std::invalid_argument("compose_edges needs at least one map");
    EdgeMap out = maps.front();
    for (std::size_t k = 1; k < maps.size(); ++k) {
        if (!maps[k].same_size(out))
            throw DimensionError("edge map " + std::to_string(k) + " is " + std::to_string(maps[k].width()) + "x" +
                                 std::to_string(maps[k].height()) + ", expected " + std::to_string(out.width()) +
                                 "x" + std::to_string(out.height()));
        for (std::size_t i = 0; i < out.data().size(); ++i)
            out.data()[i] = std::max(out.data()[i], maps[k].data()[i]);
    }
    return out;
}

/// Random component palette: one mt19937_64 draw per color, low three bytes
/// as R, G, B. The engine's output sequence is fixed by the standard.
inline std::vector<Rgb> random_palette(std::mt19937_64& rng, int count) {
    std::vector<Rgb> palette(static_cast<std::size_t>(count));
    for (Rgb& c : palette) {
        const std::uint64_t bits = rng();
        c = {static_cast<std::uint8_t>(bits & 0xff), static_cast<std::uint8_t>((bits >> 8) & 0xff),
             static_cast<std::uint8_t>((bits >> 16) & 0xff)};
    }
    return palette;
}

/// Union over `n_iters` random recolorings of the component render. All
/// iterations draw from one RNG stream, so fewer iterations with the same
/// seed always yield a subset.
inline EdgeMap cc_edges(const GBuffer& g, const ComponentLabeling& labels, int n_iters, std::uint64_t seed,
                        const CannyParams& params) {
    if (n_iters < 1) throw std::invalid_argument("cc_edges needs n_iters >= 1");
    std::mt19937_64 rng(seed);
    EdgeMap acc(g.width, g.height, 0);
    for (int it = 0; it < n_iters; ++it) {
        const auto palette = random_palette(rng, labels.count);
        acc = compose_edges({acc, canny(to_gray(render_cc_colors(g, labels, palette)), params)});
    }
    return acc;
}

inline EdgeMap cc_edges(const TriMesh& mesh, const ComponentLabeling& labels, const ViewSpec& view, int n_iters,
                        std::uint64_t seed, const CannyParams& params) {
    if (n_iters < 1) throw std::invalid_argument("cc_edges needs n_iters >= 1");
    return cc_edges(rasterize(mesh, view), labels, n_iters, seed, params);
}

inline EdgeMap depth_edges(const GBuffer& g, const CannyParams& params) { return canny(depth_to_image(g), params); }

inline EdgeMap depth_edges(const TriMesh& mesh, const ViewSpec& view, const CannyParams& params) {
    return depth_edges(rasterize(mesh, view), params);
}

inline EdgeMap normal_edges(const GBuffer& g, const CannyParams& params) {
    return canny(to_gray(normals_to_image(g)), params);
}

inline EdgeMap normal_edges(const TriMesh& mesh, const ViewSpec& view, const CannyParams& params) {
    return normal_edges(rasterize(mesh, view), params);
}

struct EdgeSources {
    bool cc = true;
    bool depth = true;
    bool normal = true;

    bool any() const { return cc || depth || normal; }
    friend bool operator==(const EdgeSources&, const EdgeSources&) = default;
};

/// Parses a comma-separated subset of {cc, depth, normal}.
inline EdgeSources parse_edge_sources(const std::string& text) {
    EdgeSources s{false, false, false};
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t end = std::min(text.find(',', start), text.size());
        const std::string tok = text.substr(start, end - start);
        if (tok == "cc") s.cc = true;
        else if (tok == "depth") s.depth = true;
        else if (tok == "normal") s.normal = true;
        else throw std::invalid_argument("unknown edge source '" + tok + "' (expected cc, depth, normal)");
        start = end + 1;
    }
    return s;
}

inline std::string to_string(const EdgeSources& s) {
    std::string out;
    const auto add = [&](bool on, const char* name) {
        if (!on) return;
        if (!out.empty()) out += ',';
        out += name;
    };
    add(s.cc, "cc");
    add(s.depth, "depth");
    add(s.normal, "normal");
    return out;
}

struct EdgeSet {
    std::optional<EdgeMap> cc;
    std::optional<EdgeMap> depth;
    std::optional<EdgeMap> normal;
    EdgeMap composed;
};

struct EdgeSettings {
    EdgeSources sources;
    int cc_iters = 5;
    std::uint64_t seed = 0;
    CannyParams canny;
};

/// Extracts the configured sources from one rasterized view and their union.
inline EdgeSet extract_edges(const GBuffer& g, const ComponentLabeling& labels, const EdgeSettings& settings) {
    if (!settings.sources.any()) throw std::invalid_argument("no edge sources selected");
    EdgeSet set;
    std::vector<EdgeMap> maps;
    if (settings.sources.cc) maps.push_back(*(set.cc = cc_edges(g, labels, settings.cc_iters, settings.seed, settings.canny)));
    if (settings.sources.depth) maps.push_back(*(set.depth = depth_edges(g, settings.canny)));
    if (settings.sources.normal) maps.push_back(*(set.normal = normal_edges(g, settings.canny)));
    set.composed = compose_edges(maps);
    return set;
}

}  // namespace meshtex
