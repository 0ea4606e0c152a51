#pragma once

// Iterative view-by-view texturing: schedule cameras, build the edge
// conditioning for each view, ask a generator for the textured view, classify
// pixels into keep / refine / generate and back-project into the UV atlas.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "meshtex/atlas.hpp"
#include "meshtex/edges.hpp"
#include "meshtex/generator.hpp"
#include "meshtex/mesh.hpp"
#include "meshtex/render.hpp"

namespace meshtex {

struct TexturingConfig {
    int n_views = 8;
    int atlas_size = 1024;
    int view_size = 512;
    double lambda_ip = 1.0;
    double lambda_cn = 1.0;
    std::int64_t seed = 0;
    EdgeSources sources;
    int cc_iters = 5;
    CannyParams canny;
    std::string prompt;
    std::string negative_prompt;
    std::optional<std::string> concept_id;
    double refine_margin = 0.2;  ///< cos_view gain needed to overwrite a seen texel
    double cos_floor = 0.2;      ///< pixels viewed more obliquely than this are never written
    bool record_timings = false;  ///< when false, per-view gen_ms is reported as 0

    void validate() const {
        if (n_views < 1) throw std::invalid_argument("n_views must be >= 1");
        if (atlas_size < 1) throw std::invalid_argument("atlas_size must be >= 1");
        if (view_size < 16) throw std::invalid_argument("view_size must be >= 16");
        if (!(cos_floor >= 0.0 && cos_floor < 1.0)) throw std::invalid_argument("cos_floor must lie in [0, 1)");
        if (!(refine_margin > 0.0)) throw std::invalid_argument("refine_margin must be positive");
        if (!(lambda_ip >= kLambdaMin && lambda_ip <= kLambdaMax)) throw std::invalid_argument("lambda_ip must lie in [0, 2]");
        if (!(lambda_cn >= kLambdaMin && lambda_cn <= kLambdaMax)) throw std::invalid_argument("lambda_cn must lie in [0, 2]");
        if (cc_iters < 1) throw std::invalid_argument("cc_iters must be >= 1");
        if (!sources.any()) throw std::invalid_argument("at least one edge source is required");
        canny.validate();
    }
};

inline constexpr double kScheduleRadius = 2.2;
inline constexpr double kScheduleFov = 40.0;
inline constexpr double kBaseElevation = 15.0;

/// Evenly spaced azimuths starting at 0. Every third view (indices 2, 5, 8,
/// ...) leaves the 15 degree ring, alternating between -15 and 45 degrees.
inline std::vector<ViewSpec> view_schedule(int n_views, int view_size = 512) {
    if (n_views < 1) throw std::invalid_argument("n_views must be >= 1");
    std::vector<ViewSpec> views;
    views.reserve(static_cast<std::size_t>(n_views));
    for (int i = 0; i < n_views; ++i) {
        ViewSpec v;
        v.azimuth = 360.0 * i / n_views;
        v.elevation = kBaseElevation;
        if (i % 3 == 2) v.elevation = (i / 3) % 2 == 0 ? -15.0 : 45.0;
        v.radius = kScheduleRadius;
        v.fov_y = kScheduleFov;
        v.width = v.height = view_size;
        views.push_back(v);
    }
    return views;
}

enum class MaskClass : std::uint8_t { background = 0, generate = 1, refine = 2, keep = 3 };

struct ViewMasks {
    int width = 0;
    int height = 0;
    std::vector<MaskClass> cls;

    MaskClass at(int x, int y) const { return cls[static_cast<std::size_t>(y) * width + x]; }
    std::size_t count(MaskClass c) const {
        return static_cast<std::size_t>(std::count(cls.begin(), cls.end(), c));
    }
};

/// Per foreground pixel p with texel t under uv(p): keep when cos_view(p) is
/// below the floor, generate when t is unseen, refine when cos_view(p)
/// exceeds score(t) by more than the margin, keep otherwise.
inline ViewMasks compute_view_masks(const TextureAtlas& atlas, const GBuffer& g, const TexturingConfig& config) {
    ViewMasks m{g.width, g.height, std::vector<MaskClass>(static_cast<std::size_t>(g.width) * g.height, MaskClass::background)};
    for (std::size_t i = 0; i < m.cls.size(); ++i) {
        if (g.face_id[i] < 0) continue;
        const double c = g.cos_view[i];
        if (c < config.cos_floor) {
            m.cls[i] = MaskClass::keep;
            continue;
        }
        const auto [tx, ty] = atlas.texel_of(g.uv[i]);
        if (!atlas.seen(tx, ty)) m.cls[i] = MaskClass::generate;
        else if (c > atlas.score(tx, ty) + config.refine_margin) m.cls[i] = MaskClass::refine;
        else m.cls[i] = MaskClass::keep;
    }
    return m;
}

namespace detail {

inline constexpr double kOcclusionEpsilon = 1e-3;

/// Bilinear sample restricted to foreground taps, renormalized.
inline std::optional<Rgb> sample_foreground(const RgbImage& img, const GBuffer& g, double px, double py) {
    const double fx = px - 0.5, fy = py - 0.5;
    const int x0 = static_cast<int>(std::floor(fx)), y0 = static_cast<int>(std::floor(fy));
    const double tx = fx - x0, ty = fy - y0;
    double acc[3] = {0, 0, 0};
    double wsum = 0.0;
    for (int dy = 0; dy <= 1; ++dy)
        for (int dx = 0; dx <= 1; ++dx) {
            const int x = std::clamp(x0 + dx, 0, g.width - 1);
            const int y = std::clamp(y0 + dy, 0, g.height - 1);
            if (!g.foreground(x, y)) continue;
            const double w = (dx ? tx : 1 - tx) * (dy ? ty : 1 - ty);
            if (w <= 0.0) continue;
            for (int c = 0; c < 3; ++c) acc[c] += w * img.at(x, y, c);
            wsum += w;
        }
    if (wsum <= 0.0) return std::nullopt;
    return Rgb{to_u8(acc[0] / wsum), to_u8(acc[1] / wsum), to_u8(acc[2] / wsum)};
}

}  // namespace detail

/// Texels whose centers fall inside some face's UV triangle (the chart
/// texels project_view can ever write). Same inclusion rule as project_view.
inline BinaryImage chart_mask(const TriMesh& mesh, int width, int height) {
    if (!mesh.has_uvs()) throw MissingUvError();
    const TextureAtlas probe(width, height);
    BinaryImage out(width, height, 0);
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
        std::array<Vec2, 3> t;
        for (int k = 0; k < 3; ++k) {
            const auto [tx, ty] = probe.uv_to_pixel(mesh.corner_uv(f, k));
            t[k] = Vec2(tx, ty);
        }
        const double area = (t[1] - t[0]).x() * (t[2] - t[0]).y() - (t[1] - t[0]).y() * (t[2] - t[0]).x();
        if (std::abs(area) < 1e-14) continue;
        const int x0 = std::max(0, static_cast<int>(std::floor(std::min({t[0].x(), t[1].x(), t[2].x()}) - 0.5)));
        const int x1 = std::min(width - 1, static_cast<int>(std::ceil(std::max({t[0].x(), t[1].x(), t[2].x()}) - 0.5)));
        const int y0 = std::max(0, static_cast<int>(std::floor(std::min({t[0].y(), t[1].y(), t[2].y()}) - 0.5)));
        const int y1 = std::min(height - 1, static_cast<int>(std::ceil(std::max({t[0].y(), t[1].y(), t[2].y()}) - 0.5)));
        for (int ty = y0; ty <= y1; ++ty)
            for (int tx = x0; tx <= x1; ++tx) {
                const Vec2 c(tx + 0.5, ty + 0.5);
                const auto cross2 = [](const Vec2& a, const Vec2& b, const Vec2& q) {
                    return (b.x() - a.x()) * (q.y() - a.y()) - (b.y() - a.y()) * (q.x() - a.x());
                };
                const double b0 = cross2(t[1], t[2], c) / area;
                const double b1 = cross2(t[2], t[0], c) / area;
                if (b0 >= -1e-9 && b1 >= -1e-9 && 1.0 - b0 - b1 >= -1e-9) out.at(tx, ty) = 255;
            }
    }
    return out;
}

struct ProjectionStats {
    std::size_t generated = 0;
    std::size_t refined = 0;
};

/// Texel-space back-projection. Each face's UV triangle is scanned over the
/// texel grid in face index order; a texel's surface point is projected into
/// the view and written from `generated` when it is visible, lands on a
/// generate/refine pixel, faces the camera at least at the floor, and either
/// is unseen or improves its score by more than the refine margin. A texel is
/// written at most once per view (first face wins).
///
/// Visibility: the pixel's ray is intersected with the texel's face plane and
/// the texel counts as occluded when that view depth exceeds the G-buffer depth by
/// more than 1e-3. Pixels owned by the same face are always visible.
inline TextureAtlas project_view(TextureAtlas atlas, const TriMesh& mesh, const ViewSpec& view, const GBuffer& g,
                                 const RgbImage& generated, const ViewMasks& masks, const TexturingConfig& config,
                                 ProjectionStats* stats = nullptr) {
    if (!mesh.has_uvs()) throw MissingUvError();
    if (!generated.same_size(view.width, view.height) || g.width != view.width || g.height != view.height ||
        masks.width != view.width || masks.height != view.height)
        throw DimensionError("generated image, G-buffer and masks must match the view size");
    const Camera cam = make_camera(view);
    const int aw = atlas.width(), ah = atlas.height();
    std::vector<std::uint8_t> written(static_cast<std::size_t>(aw) * ah, 0);
    ProjectionStats local;

    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
        const std::array<Vec3, 3> p{mesh.corner_position(f, 0), mesh.corner_position(f, 1), mesh.corner_position(f, 2)};
        const std::array<Vec3, 3> n{mesh.corner_normal(f, 0), mesh.corner_normal(f, 1), mesh.corner_normal(f, 2)};
        const Vec3 geo = (p[1] - p[0]).cross(p[2] - p[0]);
        if (geo.squaredNorm() == 0.0) continue;
        const Vec3 plane_n = geo.normalized();
        std::array<Vec2, 3> t;
        for (int k = 0; k < 3; ++k) {
            const auto [tx, ty] = atlas.uv_to_pixel(mesh.corner_uv(f, k));
            t[k] = Vec2(tx, ty);
        }
        const double area = (t[1] - t[0]).x() * (t[2] - t[0]).y() - (t[1] - t[0]).y() * (t[2] - t[0]).x();
        if (std::abs(area) < 1e-14) continue;
        const int x0 = std::max(0, static_cast<int>(std::floor(std::min({t[0].x(), t[1].x(), t[2].x()}) - 0.5)));
        const int x1 = std::min(aw - 1, static_cast<int>(std::ceil(std::max({t[0].x(), t[1].x(), t[2].x()}) - 0.5)));
        const int y0 = std::max(0, static_cast<int>(std::floor(std::min({t[0].y(), t[1].y(), t[2].y()}) - 0.5)));
        const int y1 = std::min(ah - 1, static_cast<int>(std::ceil(std::max({t[0].y(), t[1].y(), t[2].y()}) - 0.5)));
        constexpr double kInsideTol = -1e-9;
        for (int ty = y0; ty <= y1; ++ty)
            for (int tx = x0; tx <= x1; ++tx) {
                const std::size_t ti = static_cast<std::size_t>(ty) * aw + tx;
                if (written[ti]) continue;
                const Vec2 c(tx + 0.5, ty + 0.5);
                const auto cross2 = [](const Vec2& a, const Vec2& b, const Vec2& q) {
                    return (b.x() - a.x()) * (q.y() - a.y()) - (b.y() - a.y()) * (q.x() - a.x());
                };
                const double b0 = cross2(t[1], t[2], c) / area;
                const double b1 = cross2(t[2], t[0], c) / area;
                const double b2 = 1.0 - b0 - b1;
                if (b0 < kInsideTol || b1 < kInsideTol || b2 < kInsideTol) continue;
                const Vec3 pos = b0 * p[0] + b1 * p[1] + b2 * p[2];
                const Vec3 vpos = cam.to_view(pos);
                if (vpos.z() > -detail::kNearPlane) continue;
                const Vec2 pix = cam.view_to_pixel(vpos);
                if (!(pix.x() >= 0.0 && pix.y() >= 0.0 && pix.x() < view.width && pix.y() < view.height)) continue;
                const int ix = std::min(view.width - 1, static_cast<int>(pix.x()));
                const int iy = std::min(view.height - 1, static_cast<int>(pix.y()));
                const MaskClass mc = masks.at(ix, iy);
                if (mc != MaskClass::generate && mc != MaskClass::refine) continue;
                const std::size_t gi = g.index(ix, iy);
                if (g.face_id[gi] != static_cast<int>(f)) {
                    const Vec3 ray = cam.pixel_ray(ix + 0.5, iy + 0.5);
                    const double denom = ray.dot(plane_n);
                    if (std::abs(denom) < 1e-12) continue;
                    const double t_plane = (p[0] - cam.eye).dot(plane_n) / denom;
                    if (!(t_plane * ray.dot(cam.forward) <= g.depth[gi] + detail::kOcclusionEpsilon)) continue;
                }
                const double dist = (cam.eye - pos).norm();
                const Vec3 to_cam = (cam.eye - pos) / dist;
                Vec3 sn = b0 * n[0] + b1 * n[1] + b2 * n[2];
                // unflipped: the back side of a surface is never textured
                sn = sn.norm() > 1e-12 ? Vec3(sn.normalized()) : plane_n;
                const double cos_t = std::min(1.0, sn.dot(to_cam));
                if (!(cos_t > 0.0) || cos_t < config.cos_floor) continue;
                const bool was_seen = atlas.seen(tx, ty);
                if (was_seen && !(cos_t > atlas.score(tx, ty) + config.refine_margin)) continue;
                const auto color = detail::sample_foreground(generated, g, pix.x(), pix.y());
                if (!color) continue;
                atlas.write(tx, ty, *color, cos_t, was_seen ? TexelStatus::refined : TexelStatus::generated);
                written[ti] = 1;
                ++(was_seen ? local.refined : local.generated);
            }
    }
    if (stats) *stats = local;
    return atlas;
}

struct ViewReport {
    int index = 0;
    double azimuth = 0.0;
    double elevation = 0.0;
    double frac_new = 0.0;
    double frac_refine = 0.0;
    double frac_keep = 0.0;
    double frac_foreground = 0.0;
    std::size_t texels_generated = 0;
    std::size_t texels_refined = 0;
    double gen_ms = 0.0;
};

struct TexturingResult {
    TriMesh mesh;  ///< the textured mesh, with generated UVs if the input had none
    TextureAtlas atlas;
    std::vector<ViewReport> views;
    std::vector<EdgeMap> edge_maps;  ///< composed conditioning per view
};

/// Generator failure annotated with the view it happened in.
struct ViewGenerationError : GeneratorError {
    ViewGenerationError(int view, const GeneratorError& e)
        : GeneratorError(e.kind(), "view " + std::to_string(view) + ": " + e.what()), view_index(view) {}
    int view_index;
};

/// Builds the generation request for one view.
inline GeneratorRequest build_request(const TextureAtlas& atlas, const GBuffer& g, const ViewMasks& masks,
                                      const EdgeMap& edges, const RgbImage& reference, const TexturingConfig& config,
                                      std::int64_t seed) {
    GeneratorRequest req;
    req.width = g.width;
    req.height = g.height;
    req.edge_map = edges;
    req.foreground_mask = g.foreground_mask();
    req.reference_image =
        reference.same_size(g.width, g.height) ? reference : resize_bilinear(reference, g.width, g.height);
    req.prompt = config.prompt;
    req.negative_prompt = config.negative_prompt;
    req.lambda_ip = config.lambda_ip;
    req.lambda_cn = config.lambda_cn;
    req.seed = seed;
    req.concept_id = config.concept_id;

    BinaryImage keep(g.width, g.height, 0);
    bool any_keep = false;
    for (int y = 0; y < g.height; ++y)
        for (int x = 0; x < g.width; ++x) {
            if (masks.at(x, y) != MaskClass::keep) continue;
            const auto [tx, ty] = atlas.texel_of(g.uv[g.index(x, y)]);
            if (!atlas.seen(tx, ty)) continue;
            keep.at(x, y) = 255;
            any_keep = true;
        }
    if (any_keep) {
        req.keep_image = render_textured(g, atlas);
        req.keep_mask = std::move(keep);
    }
    return req;
}

/// Runs the full loop over view_schedule(config.n_views). Meshes without UVs
/// get a trivial per-triangle packing first (see generate_trivial_uvs).
inline TexturingResult texture_mesh(const TriMesh& input, Generator& generator, const TexturingConfig& config,
                                    const RgbImage& reference) {
    config.validate();
    TexturingResult result;
    result.mesh = input.has_uvs() ? input : generate_trivial_uvs(input, config.atlas_size);
    result.atlas = TextureAtlas(config.atlas_size, config.atlas_size);
    const TriMesh& mesh = result.mesh;
    const ComponentLabeling labels = connected_components(mesh);
    const auto views = view_schedule(config.n_views, config.view_size);
    for (int i = 0; i < static_cast<int>(views.size()); ++i) {
        const ViewSpec& view = views[i];
        const GBuffer g = rasterize(mesh, view);
        const std::int64_t view_seed = config.seed + i;
        EdgeSettings es{config.sources, config.cc_iters, static_cast<std::uint64_t>(view_seed), config.canny};
        EdgeSet edges = extract_edges(g, labels, es);
        const ViewMasks masks = compute_view_masks(result.atlas, g, config);
        const GeneratorRequest req = build_request(result.atlas, g, masks, edges.composed, reference, config, view_seed);

        const auto t0 = std::chrono::steady_clock::now();
        GeneratorResponse resp;
        try {
            resp = generator.generate(req, view);
            if (!resp.image.same_size(view.width, view.height))
                throw SchemaError("generator returned " + std::to_string(resp.image.width()) + "x" +
                                  std::to_string(resp.image.height()) + " image");
        } catch (const GeneratorError& e) {
            throw ViewGenerationError(i, e);
        }
        const auto t1 = std::chrono::steady_clock::now();

        ProjectionStats stats;
        result.atlas = project_view(std::move(result.atlas), mesh, view, g, resp.image, masks, config, &stats);

        const double total = static_cast<double>(masks.cls.size());
        ViewReport rep;
        rep.index = i;
        rep.azimuth = view.azimuth;
        rep.elevation = view.elevation;
        rep.frac_new = static_cast<double>(masks.count(MaskClass::generate)) / total;
        rep.frac_refine = static_cast<double>(masks.count(MaskClass::refine)) / total;
        rep.frac_keep = static_cast<double>(masks.count(MaskClass::keep)) / total;
        rep.frac_foreground = static_cast<double>(g.foreground_count()) / total;
        rep.texels_generated = stats.generated;
        rep.texels_refined = stats.refined;
        rep.gen_ms = config.record_timings ? std::chrono::duration<double, std::milli>(t1 - t0).count() : 0.0;
        result.views.push_back(rep);
        result.edge_maps.push_back(std::move(edges.composed));
    }
    return result;
}

inline nlohmann::ordered_json report_to_json(const TexturingResult& result) {
    using Json = nlohmann::ordered_json;
    Json views = Json::array();
    double gen_ms = 0.0;
    std::size_t generated = 0, refined = 0;
    for (const ViewReport& v : result.views) {
        views.push_back(Json{{"index", v.index},
                             {"az", v.azimuth},
                             {"el", v.elevation},
                             {"frac_new", v.frac_new},
                             {"frac_refine", v.frac_refine},
                             {"frac_keep", v.frac_keep},
                             {"frac_foreground", v.frac_foreground},
                             {"texels_generated", v.texels_generated},
                             {"texels_refined", v.texels_refined},
                             {"gen_ms", v.gen_ms}});
        gen_ms += v.gen_ms;
        generated += v.texels_generated;
        refined += v.texels_refined;
    }
    const auto& atlas = result.atlas;
    Json totals{{"views", result.views.size()},
                {"atlas_width", atlas.width()},
                {"atlas_height", atlas.height()},
                {"texels_seen", atlas.seen_count()},
                {"frac_seen", atlas.texel_count() ? static_cast<double>(atlas.seen_count()) / atlas.texel_count() : 0.0},
                {"texels_generated", generated},
                {"texels_refined", refined},
                {"gen_ms", gen_ms}};
    return Json{{"views", views}, {"totals", totals}};
}

}  // namespace meshtex
