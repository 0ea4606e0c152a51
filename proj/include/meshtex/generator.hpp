#pragma once

// Conditional image generator boundary: the request/response contract and the
// in-process backends (procedural mock, ground-truth oracle).

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "meshtex/atlas.hpp"
#include "meshtex/image.hpp"
#include "meshtex/mesh.hpp"
#include "meshtex/render.hpp"

namespace meshtex {

/// Base of all generator failures. `kind` lets callers map failures to exit
/// codes without catching each type.
class GeneratorError : public std::runtime_error {
public:
    enum class Kind { invalid_request, transport, backend, schema };
    GeneratorError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

struct InvalidRequestError : GeneratorError {
    explicit InvalidRequestError(const std::string& what) : GeneratorError(Kind::invalid_request, what) {}
};

struct TransportError : GeneratorError {
    explicit TransportError(const std::string& what) : GeneratorError(Kind::transport, "transport error: " + what) {}
};

struct BackendError : GeneratorError {
    BackendError(int status, const std::string& message)
        : GeneratorError(Kind::backend, "backend failure (HTTP " + std::to_string(status) + "): " + message),
          status(status), server_message(message) {}
    int status;
    std::string server_message;
};

struct SchemaError : GeneratorError {
    explicit SchemaError(const std::string& what) : GeneratorError(Kind::schema, "schema violation: " + what) {}
};

struct GeneratorRequest {
    EdgeMap edge_map;
    BinaryImage foreground_mask;
    RgbImage reference_image;
    std::string prompt;
    std::string negative_prompt;
    double lambda_ip = 1.0;
    double lambda_cn = 1.0;
    std::int64_t seed = 0;
    int width = 0;
    int height = 0;
    std::optional<RgbImage> keep_image;
    std::optional<BinaryImage> keep_mask;
    std::optional<std::string> concept_id;

    friend bool operator==(const GeneratorRequest&, const GeneratorRequest&) = default;
};

struct GeneratorResponse {
    RgbImage image;
    std::int64_t seed_used = 0;
    std::string backend;
};

inline constexpr double kLambdaMin = 0.0;
inline constexpr double kLambdaMax = 2.0;

inline void validate(const GeneratorRequest& req) {
    const auto dims = [&](const auto& img, const char* name) {
        if (!img.same_size(req.width, req.height))
            throw InvalidRequestError(std::string(name) + " is " + std::to_string(img.width()) + "x" +
                                      std::to_string(img.height()) + ", request is " + std::to_string(req.width) +
                                      "x" + std::to_string(req.height));
    };
    if (req.width <= 0 || req.height <= 0) throw InvalidRequestError("request dimensions must be positive");
    dims(req.edge_map, "edge_map");
    dims(req.foreground_mask, "foreground_mask");
    dims(req.reference_image, "reference_image");
    if (req.keep_image) dims(*req.keep_image, "keep_image");
    if (req.keep_mask) {
        dims(*req.keep_mask, "keep_mask");
        if (!req.keep_image) throw InvalidRequestError("keep_mask given without keep_image");
    }
    const auto lam = [](double v, const char* name) {
        if (!(v >= kLambdaMin && v <= kLambdaMax))
            throw InvalidRequestError(std::string(name) + " must lie in [0, 2]");
    };
    lam(req.lambda_ip, "lambda_ip");
    lam(req.lambda_cn, "lambda_cn");
}

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

}  // namespace detail

/// 16 candidate colors: the reference image box-averaged over a 4x4 grid,
/// row-major. Block (bx, by) spans x in [bx*W/4, (bx+1)*W/4) and likewise in
/// y; averages round half up.
inline std::array<Rgb, 16> reference_palette(const RgbImage& ref) {
    if (ref.width() < 4 || ref.height() < 4) throw InvalidRequestError("reference image smaller than 4x4");
    std::array<Rgb, 16> pal{};
    for (int by = 0; by < 4; ++by)
        for (int bx = 0; bx < 4; ++bx) {
            const int x0 = bx * ref.width() / 4, x1 = (bx + 1) * ref.width() / 4;
            const int y0 = by * ref.height() / 4, y1 = (by + 1) * ref.height() / 4;
            std::array<std::uint64_t, 3> sum{};
            for (int y = y0; y < y1; ++y)
                for (int x = x0; x < x1; ++x)
                    for (int c = 0; c < 3; ++c) sum[c] += ref.at(x, y, c);
            const std::uint64_t n = static_cast<std::uint64_t>(x1 - x0) * (y1 - y0);
            for (int c = 0; c < 3; ++c) pal[by * 4 + bx][c] = static_cast<std::uint8_t>((2 * sum[c] + n) / (2 * n));
        }
    return pal;
}

/// Region id used for foreground pixels that lie on an edge.
inline constexpr std::uint64_t kEdgeRegion = ~std::uint64_t{0};

/// Palette slot for a region: splitmix64(seed XOR splitmix64(region)) mod 16,
/// with the seed taken as its two's-complement 64-bit pattern.
inline int mock_palette_index(std::uint64_t region, std::int64_t seed) {
    return static_cast<int>(detail::splitmix64(static_cast<std::uint64_t>(seed) ^ detail::splitmix64(region)) % 16);
}

/// Labels 4-connected regions of foreground, non-edge pixels in raster scan
/// order of their first pixel. Other pixels get -1.
inline std::vector<int> label_mock_regions(const BinaryImage& foreground, const EdgeMap& edges, int& count) {
    const int w = foreground.width();
    const int h = foreground.height();
    std::vector<int> label(static_cast<std::size_t>(w) * h, -1);
    const auto open = [&](int x, int y) { return foreground.at(x, y) != 0 && edges.at(x, y) == 0; };
    count = 0;
    std::vector<std::pair<int, int>> stack;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (!open(x, y) || label[static_cast<std::size_t>(y) * w + x] >= 0) continue;
            const int id = count++;
            label[static_cast<std::size_t>(y) * w + x] = id;
            stack.emplace_back(x, y);
            while (!stack.empty()) {
                const auto [cx, cy] = stack.back();
                stack.pop_back();
                constexpr std::array<std::array<int, 2>, 4> nbr{{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};
                for (const auto& d : nbr) {
                    const int nx = cx + d[0], ny = cy + d[1];
                    if (nx < 0 || ny < 0 || nx >= w || ny >= h || !open(nx, ny)) continue;
                    int& l = label[static_cast<std::size_t>(ny) * w + nx];
                    if (l >= 0) continue;
                    l = id;
                    stack.emplace_back(nx, ny);
                }
            }
        }
    return label;
}

/// Deterministic procedural backend. Foreground regions bounded by edge
/// pixels each take one color of the 16-color reference palette chosen by a
/// hash of (region id, seed); foreground edge pixels use region kEdgeRegion;
/// background is white; keep_mask pixels are copied from keep_image.
inline GeneratorResponse mock_generate(const GeneratorRequest& req) {
    validate(req);
    const auto pal = reference_palette(req.reference_image);
    int count = 0;
    const auto label = label_mock_regions(req.foreground_mask, req.edge_map, count);
    const Rgb edge_color = pal[mock_palette_index(kEdgeRegion, req.seed)];
    GeneratorResponse resp{RgbImage(req.width, req.height, 255), req.seed, "mock"};
    for (int y = 0; y < req.height; ++y)
        for (int x = 0; x < req.width; ++x) {
            if (!req.foreground_mask.at(x, y)) continue;
            const int l = label[static_cast<std::size_t>(y) * req.width + x];
            resp.image.set_pixel(x, y, l >= 0 ? pal[mock_palette_index(static_cast<std::uint64_t>(l), req.seed)] : edge_color);
        }
    if (req.keep_mask)
        for (int y = 0; y < req.height; ++y)
            for (int x = 0; x < req.width; ++x)
                if (req.keep_mask->at(x, y)) resp.image.set_pixel(x, y, req.keep_image->pixel(x, y));
    return resp;
}

/// Renders the ground-truth textured mesh: a generator that already knows
/// the answer, used to measure projection fidelity.
inline GeneratorResponse oracle_generate(const GeneratorRequest& req, const TriMesh& truth_mesh,
                                         const TextureAtlas& truth_atlas, const ViewSpec& view) {
    if (view.width != req.width || view.height != req.height)
        throw InvalidRequestError("oracle view is " + std::to_string(view.width) + "x" + std::to_string(view.height) +
                                  ", request is " + std::to_string(req.width) + "x" + std::to_string(req.height));
    return {render_textured(truth_mesh, truth_atlas, view), req.seed, "oracle"};
}

/// Anything that can answer a generation request for a given view.
class Generator {
public:
    virtual ~Generator() = default;
    virtual GeneratorResponse generate(const GeneratorRequest& req, const ViewSpec& view) = 0;
};

class MockGenerator final : public Generator {
public:
    GeneratorResponse generate(const GeneratorRequest& req, const ViewSpec&) override { return mock_generate(req); }
};

class OracleGenerator final : public Generator {
public:
    OracleGenerator(TriMesh truth_mesh, TextureAtlas truth_atlas)
        : mesh_(std::move(truth_mesh)), atlas_(std::move(truth_atlas)) {}

    GeneratorResponse generate(const GeneratorRequest& req, const ViewSpec& view) override {
        return oracle_generate(req, mesh_, atlas_, view);
    }

private:
    TriMesh mesh_;
    TextureAtlas atlas_;
};

}  // namespace meshtex
