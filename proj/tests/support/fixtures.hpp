#pragma once

// Random and constructed inputs shared by the test suites.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "meshtex/image.hpp"
#include "meshtex/mesh.hpp"
#include "meshtex/primitives.hpp"

namespace fixtures {

using meshtex::Corner;
using meshtex::Face;
using meshtex::GrayImage;
using meshtex::TriMesh;
using meshtex::Vec3;

inline GrayImage random_gray(std::mt19937_64& rng, int w, int h) {
    GrayImage img(w, h);
    for (auto& v : img.data()) v = static_cast<std::uint8_t>(rng() & 0xff);
    return img;
}

/// Random blobs on a random background: smoother than white noise, so the
/// hysteresis path actually links weak pixels.
inline GrayImage random_shapes(std::mt19937_64& rng, int w, int h) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    GrayImage img(w, h, static_cast<std::uint8_t>(rng() & 0xff));
    const int n = 2 + static_cast<int>(rng() % 5);
    for (int s = 0; s < n; ++s) {
        const double cx = u(rng) * w, cy = u(rng) * h, r = 4 + u(rng) * w / 3;
        const auto val = static_cast<std::uint8_t>(rng() & 0xff);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                if ((x - cx) * (x - cx) + (y - cy) * (y - cy) < r * r) img.at(x, y) = val;
    }
    return img;
}

inline GrayImage step_image(int w, int h, int step_x) {
    GrayImage img(w, h, 0);
    for (int y = 0; y < h; ++y)
        for (int x = step_x; x < w; ++x) img.at(x, y) = 255;
    return img;
}

inline GrayImage disk_image(int size, double radius) {
    GrayImage img(size, size, 0);
    const double c = size / 2.0;
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x) {
            const double dx = x + 0.5 - c, dy = y + 0.5 - c;
            if (dx * dx + dy * dy <= radius * radius) img.at(x, y) = 255;
        }
    return img;
}

/// `n` independent random triangles inside [-1,1]^3 with flat normals.
inline TriMesh random_triangle_soup(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    TriMesh m;
    for (int i = 0; i < n; ++i) {
        const Vec3 c(u(rng) * 0.6, u(rng) * 0.6, u(rng) * 0.6);
        const int base = static_cast<int>(m.positions.size());
        for (int k = 0; k < 3; ++k) m.positions.push_back(c + 0.4 * Vec3(u(rng), u(rng), u(rng)));
        m.faces.push_back(Face{{Corner{base, -1, -1}, Corner{base + 1, -1, -1}, Corner{base + 2, -1, -1}}});
    }
    m.needs_uvs = true;
    return meshtex::compute_vertex_normals(std::move(m));
}

/// Random multi-part mesh: `parts` closed boxes or random fans, some of them
/// stitched together through shared vertices. Returns faces shuffled.
inline TriMesh random_multipart(std::mt19937_64& rng, int parts, int max_faces) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    TriMesh m;
    int budget = max_faces;
    for (int p = 0; p < parts && budget > 12; ++p) {
        if (rng() % 2 == 0) {
            const Vec3 c(u(rng) * 3, u(rng) * 3, u(rng) * 3);
            TriMesh b = meshtex::primitives::box(c, c + Vec3(0.2, 0.3, 0.4));
            b.uvs.clear();
            for (auto& f : b.faces)
                for (auto& cr : f.corners) cr.uv = -1, cr.normal = -1;
            b.normals.clear();
            meshtex::append_mesh(m, b);
            budget -= 12;
        } else {
            // random strip of triangles over a fresh vertex pool
            const int nv = 3 + static_cast<int>(rng() % 40);
            const int base = static_cast<int>(m.positions.size());
            for (int i = 0; i < nv; ++i) m.positions.emplace_back(u(rng), u(rng), u(rng));
            const int nf = std::min(budget, 1 + static_cast<int>(rng() % (2 * nv)));
            for (int i = 0; i < nf; ++i) {
                int a = static_cast<int>(rng() % nv), b = static_cast<int>(rng() % nv), c = static_cast<int>(rng() % nv);
                if (a == b || b == c || a == c) continue;
                m.faces.push_back(Face{{Corner{base + a, -1, -1}, Corner{base + b, -1, -1}, Corner{base + c, -1, -1}}});
                --budget;
            }
        }
    }
    if (m.faces.empty()) {
        m.positions = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)};
        m.faces.push_back(Face{{Corner{0, -1, -1}, Corner{1, -1, -1}, Corner{2, -1, -1}}});
    }
    std::shuffle(m.faces.begin(), m.faces.end(), rng);
    m.needs_uvs = true;
    return meshtex::compute_vertex_normals(std::move(m));
}

/// `k` unit boxes laid out along x with gaps (one component each).
inline TriMesh separated_boxes(int k) {
    TriMesh m;
    for (int i = 0; i < k; ++i) meshtex::append_mesh(m, meshtex::primitives::box(Vec3(3.0 * i, 0, 0), Vec3(3.0 * i + 1, 1, 1)));
    return m;
}

/// Two boxes touching along x = 0 with separate vertex sets (two components).
inline TriMesh abutting_boxes() {
    TriMesh m = meshtex::primitives::box(Vec3(-1, -0.5, -0.5), Vec3(0, 0.5, 0.5));
    meshtex::append_mesh(m, meshtex::primitives::box(Vec3(0, -0.5, -0.5), Vec3(1, 0.5, 0.5)));
    return meshtex::normalize_mesh(m);
}

/// Ten normalized closed meshes without sub-pixel features.
inline std::vector<TriMesh> solid_meshes() {
    namespace P = meshtex::primitives;
    std::vector<TriMesh> out;
    out.push_back(P::cube(0.5));
    out.push_back(P::icosphere(2));
    out.push_back(P::icosphere(3));
    out.push_back(P::uv_sphere(16, 32));
    out.push_back(P::box(Vec3(-1, -0.3, -0.2), Vec3(1, 0.3, 0.2)));
    out.push_back(separated_boxes(2));
    out.push_back(separated_boxes(4));
    out.push_back(abutting_boxes());
    TriMesh mixed = P::icosphere(2);
    meshtex::append_mesh(mixed, P::translated(P::cube(0.6), Vec3(1.8, 0.4, -0.3)));
    out.push_back(std::move(mixed));
    TriMesh stack = P::box(Vec3(-1, -1, -1), Vec3(1, 0, 1));
    meshtex::append_mesh(stack, P::translated(P::uv_sphere(12, 24, 0.7), Vec3(0, 0.7, 0)));
    out.push_back(std::move(stack));
    for (auto& m : out) m = meshtex::normalize_mesh(m);
    return out;
}

}  // namespace fixtures
