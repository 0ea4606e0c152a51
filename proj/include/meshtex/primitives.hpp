#pragma once

// Procedural meshes with UV layouts, used by tests, demos and the CLI.

#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <utility>

#include "meshtex/mesh.hpp"

namespace meshtex::primitives {

/// Axis-aligned box. Shares the 8 corner positions across faces (one
/// connected component), uses flat per-face normals and lays the six faces
/// out as a 3x2 grid of UV tiles with `margin` (fraction of a tile) padding.
inline TriMesh box(const Vec3& lo, const Vec3& hi, double margin = 0.02) {
    TriMesh m;
    for (int i = 0; i < 8; ++i)
        m.positions.emplace_back(i & 1 ? hi.x() : lo.x(), i & 2 ? hi.y() : lo.y(), i & 4 ? hi.z() : lo.z());
    // Corner ids counter-clockwise seen from outside, starting bottom-left of the tile.
    const std::array<std::array<int, 4>, 6> quads{{
        {5, 1, 3, 7},  // +x
        {0, 4, 6, 2},  // -x
        {6, 7, 3, 2},  // +y
        {0, 1, 5, 4},  // -y
        {4, 5, 7, 6},  // +z
        {1, 0, 2, 3},  // -z
    }};
    const std::array<Vec3, 6> normals{Vec3::UnitX(), -Vec3::UnitX(), Vec3::UnitY(),
                                      -Vec3::UnitY(), Vec3::UnitZ(), -Vec3::UnitZ()};
    const std::array<Vec2, 4> tile{Vec2(0, 0), Vec2(1, 0), Vec2(1, 1), Vec2(0, 1)};
    for (int q = 0; q < 6; ++q) {
        const int col = q % 3;
        const int row = q / 3;
        m.normals.push_back(normals[q]);
        const int uv0 = static_cast<int>(m.uvs.size());
        for (const Vec2& t : tile) {
            const Vec2 local = Vec2::Constant(margin) + t * (1.0 - 2.0 * margin);
            m.uvs.emplace_back((col + local.x()) / 3.0, (row + local.y()) / 2.0);
        }
        const auto corner = [&](int k) { return Corner{quads[q][k], uv0 + k, q}; };
        m.faces.push_back(Face{{corner(0), corner(1), corner(2)}});
        m.faces.push_back(Face{{corner(0), corner(2), corner(3)}});
    }
    return m;
}

inline TriMesh cube(double half = 1.0) { return box(Vec3::Constant(-half), Vec3::Constant(half)); }

/// Latitude/longitude sphere. Positions are shared along the seam and at the
/// poles; UVs are duplicated along the seam so the layout covers [0,1]^2.
inline TriMesh uv_sphere(int stacks, int slices, double radius = 1.0) {
    TriMesh m;
    const double pi = std::numbers::pi;
    // positions: south pole, rings 1..stacks-1, north pole
    m.positions.emplace_back(0, -radius, 0);
    for (int i = 1; i < stacks; ++i) {
        const double lat = -pi / 2 + pi * i / stacks;
        for (int j = 0; j < slices; ++j) {
            const double lon = 2 * pi * j / slices;
            m.positions.emplace_back(radius * std::cos(lat) * std::sin(lon), radius * std::sin(lat),
                                     radius * std::cos(lat) * std::cos(lon));
        }
    }
    m.positions.emplace_back(0, radius, 0);
    const int north = static_cast<int>(m.positions.size()) - 1;
    const auto pos_id = [&](int i, int j) {
        if (i == 0) return 0;
        if (i == stacks) return north;
        return 1 + (i - 1) * slices + (j % slices);
    };
    for (const Vec3& p : m.positions) m.normals.push_back(p.normalized());
    for (int i = 0; i <= stacks; ++i)
        for (int j = 0; j <= slices; ++j)
            m.uvs.emplace_back(static_cast<double>(j) / slices, static_cast<double>(i) / stacks);
    const auto uv_id = [&](int i, int j) { return i * (slices + 1) + j; };
    const auto corner = [&](int i, int j) { return Corner{pos_id(i, j), uv_id(i, j), pos_id(i, j)}; };
    for (int i = 0; i < stacks; ++i)
        for (int j = 0; j < slices; ++j) {
            if (i != 0) m.faces.push_back(Face{{corner(i, j), corner(i, j + 1), corner(i + 1, j + 1)}});
            if (i != stacks - 1) m.faces.push_back(Face{{corner(i, j), corner(i + 1, j + 1), corner(i + 1, j)}});
        }
    return m;
}

/// Subdivided icosahedron on the unit sphere, exact radial normals, no UVs.
inline TriMesh icosphere(int subdivisions) {
    TriMesh m;
    const double t = (1.0 + std::sqrt(5.0)) / 2.0;
    const std::array<Vec3, 12> base{Vec3(-1, t, 0), Vec3(1, t, 0),   Vec3(-1, -t, 0), Vec3(1, -t, 0),
                                    Vec3(0, -1, t), Vec3(0, 1, t),   Vec3(0, -1, -t), Vec3(0, 1, -t),
                                    Vec3(t, 0, -1), Vec3(t, 0, 1),   Vec3(-t, 0, -1), Vec3(-t, 0, 1)};
    for (const Vec3& p : base) m.positions.push_back(p.normalized());
    std::vector<std::array<int, 3>> tris{{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                                         {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                                         {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                                         {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
    for (int s = 0; s < subdivisions; ++s) {
        std::map<std::pair<int, int>, int> mid;
        const auto midpoint = [&](int a, int b) {
            const auto key = std::minmax(a, b);
            const auto it = mid.find(key);
            if (it != mid.end()) return it->second;
            m.positions.push_back((m.positions[a] + m.positions[b]).normalized());
            const int id = static_cast<int>(m.positions.size()) - 1;
            mid.emplace(key, id);
            return id;
        };
        std::vector<std::array<int, 3>> next;
        for (const auto& tri : tris) {
            const int ab = midpoint(tri[0], tri[1]);
            const int bc = midpoint(tri[1], tri[2]);
            const int ca = midpoint(tri[2], tri[0]);
            next.push_back({tri[0], ab, ca});
            next.push_back({tri[1], bc, ab});
            next.push_back({tri[2], ca, bc});
            next.push_back({ab, bc, ca});
        }
        tris = std::move(next);
    }
    m.normals = m.positions;
    for (const auto& tri : tris) m.faces.push_back(Face{{Corner{tri[0], -1, tri[0]}, Corner{tri[1], -1, tri[1]},
                                                         Corner{tri[2], -1, tri[2]}}});
    m.needs_uvs = true;
    return m;
}

/// Quad in the plane z = `z` spanning [x0,x1]x[y0,y1], facing +z, with UVs
/// covering [0,1]^2 (u along +x, v along +y).
inline TriMesh quad(double x0, double y0, double x1, double y1, double z = 0.0) {
    TriMesh m;
    m.positions = {Vec3(x0, y0, z), Vec3(x1, y0, z), Vec3(x1, y1, z), Vec3(x0, y1, z)};
    m.uvs = {Vec2(0, 0), Vec2(1, 0), Vec2(1, 1), Vec2(0, 1)};
    m.normals = {Vec3::UnitZ()};
    const auto c = [](int k) { return Corner{k, k, 0}; };
    m.faces = {Face{{c(0), c(1), c(2)}}, Face{{c(0), c(2), c(3)}}};
    return m;
}

/// Translated copy.
inline TriMesh translated(TriMesh m, const Vec3& offset) {
    for (Vec3& p : m.positions) p += offset;
    return m;
}

}  // namespace meshtex::primitives
