#pragma once

// Deterministic z-buffered software rasterizer producing per-view G-buffers.
//
// Camera convention: right handed, the camera orbits the origin and looks at
// it. Azimuth 0 / elevation 0 puts the camera on +z; azimuth rotates toward
// +x, elevation toward +y. View space has x right, y up and the camera
// looking down -z. Pixel (0,0) is the top-left corner and pixel centers sit
// at integer + 0.5.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <vector>

#include "meshtex/atlas.hpp"
#include "meshtex/image.hpp"
#include "meshtex/mesh.hpp"

namespace meshtex {

struct ViewSpec {
    double azimuth = 0.0;    ///< degrees
    double elevation = 0.0;  ///< degrees
    double radius = 2.2;     ///< camera distance, multiples of the bounding-sphere radius
    double fov_y = 40.0;     ///< degrees
    int width = 512;
    int height = 512;

    void validate() const {
        if (!(fov_y > 0.0 && fov_y < 180.0)) throw std::invalid_argument("fov_y must be in (0, 180)");
        if (width < 16 || height < 16) throw std::invalid_argument("view must be at least 16x16 pixels");
        if (!(radius > 1.0)) throw std::invalid_argument("camera radius must exceed 1");
    }
};

inline double deg2rad(double d) { return d * std::numbers::pi / 180.0; }

struct Camera {
    Vec3 eye;
    Vec3 right;
    Vec3 up;
    Vec3 forward;
    double focal = 1.0;  ///< 1 / tan(fov_y / 2)
    int width = 0;
    int height = 0;

    double aspect() const { return static_cast<double>(width) / height; }

    Vec3 to_view(const Vec3& p) const {
        const Vec3 d = p - eye;
        return {d.dot(right), d.dot(up), -d.dot(forward)};
    }
    Vec3 rotate_to_view(const Vec3& dir) const { return {dir.dot(right), dir.dot(up), -dir.dot(forward)}; }

    /// Continuous pixel coordinates of a view-space point in front of the camera.
    Vec2 view_to_pixel(const Vec3& v) const {
        const double w = -v.z();
        const double ndc_x = focal / aspect() * v.x() / w;
        const double ndc_y = focal * v.y() / w;
        return {(ndc_x + 1.0) * 0.5 * width, (1.0 - ndc_y) * 0.5 * height};
    }

    /// Unit world-space direction through continuous pixel coordinates.
    Vec3 pixel_ray(double px, double py) const {
        const double ndc_x = 2.0 * px / width - 1.0;
        const double ndc_y = 1.0 - 2.0 * py / height;
        return (forward + right * (ndc_x * aspect() / focal) + up * (ndc_y / focal)).normalized();
    }
};

inline Camera make_camera(const ViewSpec& view) {
    const double az = deg2rad(view.azimuth);
    const double el = deg2rad(view.elevation);
    Camera cam;
    cam.eye = view.radius * Vec3(std::cos(el) * std::sin(az), std::sin(el), std::cos(el) * std::cos(az));
    cam.forward = (-cam.eye).normalized();
    Vec3 up_hint = Vec3::UnitY();
    if (cam.forward.cross(up_hint).norm() < 1e-9) up_hint = cam.eye.y() > 0 ? Vec3(-Vec3::UnitZ()) : Vec3(Vec3::UnitZ());
    cam.right = cam.forward.cross(up_hint).normalized();
    cam.up = cam.right.cross(cam.forward);
    cam.focal = 1.0 / std::tan(deg2rad(view.fov_y) * 0.5);
    cam.width = view.width;
    cam.height = view.height;
    return cam;
}

/// Per-pixel render targets for one view. A pixel is foreground iff it has a
/// face id iff its depth is finite.
struct GBuffer {
    int width = 0;
    int height = 0;
    std::vector<double> depth;    ///< view-space depth along the optical axis; +inf on background
    std::vector<Vec3> normal;     ///< view space, flipped toward the camera; zero on background
    std::vector<int> face_id;     ///< -1 on background
    std::vector<Vec2> uv;
    std::vector<double> cos_view;  ///< shading normal . direction to camera

    GBuffer() = default;
    GBuffer(int w, int h)
        : width(w), height(h),
          depth(static_cast<std::size_t>(w) * h, std::numeric_limits<double>::infinity()),
          normal(static_cast<std::size_t>(w) * h, Vec3::Zero()),
          face_id(static_cast<std::size_t>(w) * h, -1),
          uv(static_cast<std::size_t>(w) * h, Vec2::Zero()),
          cos_view(static_cast<std::size_t>(w) * h, 0.0) {}

    std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width + x; }
    bool foreground(int x, int y) const { return face_id[index(x, y)] >= 0; }
    std::optional<int> face(int x, int y) const {
        const int f = face_id[index(x, y)];
        return f >= 0 ? std::optional<int>(f) : std::nullopt;
    }

    BinaryImage foreground_mask() const {
        BinaryImage m(width, height);
        for (std::size_t i = 0; i < face_id.size(); ++i) m.data()[i] = face_id[i] >= 0 ? 255 : 0;
        return m;
    }
    std::size_t foreground_count() const {
        return static_cast<std::size_t>(std::count_if(face_id.begin(), face_id.end(), [](int f) { return f >= 0; }));
    }
};

namespace detail {

inline constexpr double kNearPlane = 1e-4;

struct ClipVertex {
    Vec3 view;  ///< view-space position
    Vec3 bary;  ///< barycentric coordinates w.r.t. the source triangle
};

/// Sutherland-Hodgman against z <= -near; returns 0, 3 or 4 vertices.
inline std::vector<ClipVertex> clip_near(const std::array<ClipVertex, 3>& tri) {
    std::vector<ClipVertex> out;
    out.reserve(4);
    const auto inside = [](const ClipVertex& v) { return v.view.z() <= -kNearPlane; };
    for (int i = 0; i < 3; ++i) {
        const ClipVertex& a = tri[i];
        const ClipVertex& b = tri[(i + 1) % 3];
        const bool ia = inside(a);
        const bool ib = inside(b);
        if (ia) out.push_back(a);
        if (ia != ib) {
            const double t = (-kNearPlane - a.view.z()) / (b.view.z() - a.view.z());
            out.push_back({a.view + t * (b.view - a.view), a.bary + t * (b.bary - a.bary)});
        }
    }
    return out;
}

/// Calls fn(x, y, bary) for each pixel center covered by the projected
/// triangle, with perspective-correct barycentrics w.r.t. the source face.
template <class Fn>
void scan_triangle(const Camera& cam, const ClipVertex& a, const ClipVertex& b, const ClipVertex& c, Fn&& fn) {
    const std::array<const ClipVertex*, 3> v{&a, &b, &c};
    std::array<Vec2, 3> s;
    std::array<double, 3> inv_w;
    for (int k = 0; k < 3; ++k) {
        s[k] = cam.view_to_pixel(v[k]->view);
        inv_w[k] = 1.0 / -v[k]->view.z();
    }
    const auto edge = [](const Vec2& p, const Vec2& q, double x, double y) {
        return (q.x() - p.x()) * (y - p.y()) - (q.y() - p.y()) * (x - p.x());
    };
    const double area = edge(s[0], s[1], s[2].x(), s[2].y());
    if (!(std::abs(area) > 1e-12)) return;
    const double minx = std::min({s[0].x(), s[1].x(), s[2].x()});
    const double maxx = std::max({s[0].x(), s[1].x(), s[2].x()});
    const double miny = std::min({s[0].y(), s[1].y(), s[2].y()});
    const double maxy = std::max({s[0].y(), s[1].y(), s[2].y()});
    const auto clamp_to = [](double v, int hi) { return static_cast<int>(std::clamp(v, -1.0, static_cast<double>(hi))); };
    const int x0 = std::max(0, clamp_to(std::floor(minx - 0.5), cam.width));
    const int x1 = std::min(cam.width - 1, clamp_to(std::ceil(maxx - 0.5), cam.width));
    const int y0 = std::max(0, clamp_to(std::floor(miny - 0.5), cam.height));
    const int y1 = std::min(cam.height - 1, clamp_to(std::ceil(maxy - 0.5), cam.height));
    for (int y = y0; y <= y1; ++y) {
        const double py = y + 0.5;
        for (int x = x0; x <= x1; ++x) {
            const double px = x + 0.5;
            const double l0 = edge(s[1], s[2], px, py) / area;
            const double l1 = edge(s[2], s[0], px, py) / area;
            const double l2 = edge(s[0], s[1], px, py) / area;
            if (l0 < 0.0 || l1 < 0.0 || l2 < 0.0) continue;
            const double q0 = l0 * inv_w[0];
            const double q1 = l1 * inv_w[1];
            const double q2 = l2 * inv_w[2];
            const double qs = q0 + q1 + q2;
            const Vec3 bary = (q0 * v[0]->bary + q1 * v[1]->bary + q2 * v[2]->bary) / qs;
            fn(x, y, bary);
        }
    }
}

/// Visits every covered pixel of face `f` after near-plane clipping.
template <class Fn>
void scan_face(const Camera& cam, const TriMesh& mesh, std::size_t f, Fn&& fn) {
    std::array<ClipVertex, 3> tri;
    for (int k = 0; k < 3; ++k) {
        tri[k].view = cam.to_view(mesh.corner_position(f, k));
        tri[k].bary = Vec3::Unit(k);
    }
    const std::vector<ClipVertex> poly = clip_near(tri);
    for (std::size_t k = 1; k + 1 < poly.size(); ++k) scan_triangle(cam, poly[0], poly[k], poly[k + 1], fn);
}

}  // namespace detail

/// Double-sided perspective rasterization. Faces are processed in index
/// order and a later face only wins a pixel when strictly nearer.
inline GBuffer rasterize(const TriMesh& mesh, const ViewSpec& view) {
    view.validate();
    const Camera cam = make_camera(view);
    GBuffer g(view.width, view.height);
    const bool has_uv = mesh.has_uvs();
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
        const std::array<Vec3, 3> p{mesh.corner_position(f, 0), mesh.corner_position(f, 1), mesh.corner_position(f, 2)};
        const Vec3 geo = (p[1] - p[0]).cross(p[2] - p[0]);
        detail::scan_face(cam, mesh, f, [&](int x, int y, const Vec3& b) {
            const Vec3 pos = b[0] * p[0] + b[1] * p[1] + b[2] * p[2];
            const double z = (pos - cam.eye).dot(cam.forward);
            const std::size_t i = g.index(x, y);
            if (!(z < g.depth[i])) return;
            const Vec3 to_cam = (cam.eye - pos).normalized();
            Vec3 n = b[0] * mesh.corner_normal(f, 0) + b[1] * mesh.corner_normal(f, 1) + b[2] * mesh.corner_normal(f, 2);
            const double nlen = n.norm();
            n = nlen > 1e-12 ? Vec3(n / nlen) : Vec3(geo.normalized());
            const double facing = geo.squaredNorm() > 0.0 ? geo.dot(to_cam) : n.dot(to_cam);
            if (facing < 0.0) n = -n;
            g.depth[i] = z;
            g.face_id[i] = static_cast<int>(f);
            g.normal[i] = cam.rotate_to_view(n);
            g.cos_view[i] = std::clamp(n.dot(to_cam), -1.0, 1.0);
            g.uv[i] = has_uv ? Vec2(b[0] * mesh.corner_uv(f, 0) + b[1] * mesh.corner_uv(f, 1) + b[2] * mesh.corner_uv(f, 2))
                             : Vec2::Zero();
        });
    }
    return g;
}

/// Foreground depths mapped linearly so nearest -> 255 and farthest -> 0.
inline GrayImage depth_to_image(const GBuffer& g) {
    GrayImage out(g.width, g.height, 0);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < g.depth.size(); ++i)
        if (g.face_id[i] >= 0) {
            lo = std::min(lo, g.depth[i]);
            hi = std::max(hi, g.depth[i]);
        }
    if (lo > hi) return out;
    const double range = hi - lo;
    for (std::size_t i = 0; i < g.depth.size(); ++i) {
        if (g.face_id[i] < 0) continue;
        out.data()[i] = range > 0.0 ? to_u8(255.0 * (hi - g.depth[i]) / range) : 255;
    }
    return out;
}

/// View-space normals, each component mapped from [-1,1] to [0,255].
inline RgbImage normals_to_image(const GBuffer& g) {
    RgbImage out(g.width, g.height, 0);
    for (int y = 0; y < g.height; ++y)
        for (int x = 0; x < g.width; ++x) {
            const std::size_t i = g.index(x, y);
            if (g.face_id[i] < 0) continue;
            for (int c = 0; c < 3; ++c) out.at(x, y, c) = to_u8((g.normal[i][c] + 1.0) * 0.5 * 255.0);
        }
    return out;
}

inline RgbImage render_cc_colors(const GBuffer& g, const ComponentLabeling& labels, const std::vector<Rgb>& palette) {
    if (palette.size() != static_cast<std::size_t>(labels.count))
        throw std::invalid_argument("palette size " + std::to_string(palette.size()) + " does not match " +
                                    std::to_string(labels.count) + " components");
    RgbImage out(g.width, g.height, 255);
    for (int y = 0; y < g.height; ++y)
        for (int x = 0; x < g.width; ++x)
            if (const auto f = g.face(x, y)) out.set_pixel(x, y, palette[labels.face_labels[*f]]);
    return out;
}

/// Flat per-component colors on a white background.
inline RgbImage render_cc_colors(const TriMesh& mesh, const ComponentLabeling& labels, const std::vector<Rgb>& palette,
                                 const ViewSpec& view) {
    if (palette.size() != static_cast<std::size_t>(labels.count))
        throw std::invalid_argument("palette size does not match component count");
    return render_cc_colors(rasterize(mesh, view), labels, palette);
}

struct MissingUvError : std::invalid_argument {
    MissingUvError() : std::invalid_argument("mesh has no UV coordinates") {}
};

/// Bilinear lookup of the atlas at each foreground pixel's UV; white background.
inline RgbImage render_textured(const GBuffer& g, const TextureAtlas& atlas) {
    RgbImage out(g.width, g.height, 255);
    const RgbImage tex = atlas.rgb_image();
    for (int y = 0; y < g.height; ++y)
        for (int x = 0; x < g.width; ++x) {
            const std::size_t i = g.index(x, y);
            if (g.face_id[i] < 0) continue;
            const auto [tx, ty] = atlas.uv_to_pixel(g.uv[i]);
            const auto c = sample_bilinear(tex, tx, ty);
            for (int k = 0; k < 3; ++k) out.at(x, y, k) = to_u8(c[k]);
        }
    return out;
}

inline RgbImage render_textured(const TriMesh& mesh, const TextureAtlas& atlas, const ViewSpec& view) {
    if (!mesh.has_uvs()) throw MissingUvError();
    return render_textured(rasterize(mesh, view), atlas);
}

}  // namespace meshtex
