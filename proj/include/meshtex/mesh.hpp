#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace meshtex {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;

struct MeshError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Index triple for one triangle corner. `uv` and `normal` are -1 when absent.
struct Corner {
    int position = -1;
    int uv = -1;
    int normal = -1;
    friend bool operator==(const Corner&, const Corner&) = default;
};

struct Face {
    std::array<Corner, 3> corners;
    int position(int k) const { return corners[k].position; }
};

struct TriMesh {
    std::vector<Vec3> positions;
    std::vector<Vec3> normals;
    std::vector<Vec2> uvs;
    std::vector<Face> faces;
    /// Set by the loader when the source carries no usable UVs.
    bool needs_uvs = false;
    /// Set when UVs come from generate_trivial_uvs rather than the source.
    bool uv_generated = false;

    bool has_uvs() const noexcept { return !uvs.empty() && !needs_uvs; }

    Vec3 corner_position(std::size_t f, int k) const { return positions[faces[f].corners[k].position]; }
    Vec3 corner_normal(std::size_t f, int k) const { return normals[faces[f].corners[k].normal]; }
    Vec2 corner_uv(std::size_t f, int k) const { return uvs[faces[f].corners[k].uv]; }
};

/// Throws MeshError describing the first violated structural invariant.
inline void validate(const TriMesh& mesh) {
    if (mesh.faces.empty()) throw MeshError("mesh has no faces");
    const auto in_range = [](int i, std::size_t n) { return i >= 0 && static_cast<std::size_t>(i) < n; };
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
        const Face& face = mesh.faces[f];
        for (const Corner& c : face.corners) {
            if (!in_range(c.position, mesh.positions.size()))
                throw MeshError("face " + std::to_string(f) + ": position index out of range");
            if (!in_range(c.normal, mesh.normals.size()))
                throw MeshError("face " + std::to_string(f) + ": normal index out of range");
            if (mesh.has_uvs() && !in_range(c.uv, mesh.uvs.size()))
                throw MeshError("face " + std::to_string(f) + ": uv index out of range");
        }
        if (face.position(0) == face.position(1) || face.position(1) == face.position(2) ||
            face.position(0) == face.position(2))
            throw MeshError("face " + std::to_string(f) + ": repeated position index");
    }
    for (const Vec3& n : mesh.normals)
        if (std::abs(n.norm() - 1.0) > 1e-4) throw MeshError("normal is not unit length");
}

inline Vec3 face_normal_unnormalized(const TriMesh& mesh, std::size_t f) {
    const Vec3 a = mesh.corner_position(f, 0);
    return (mesh.corner_position(f, 1) - a).cross(mesh.corner_position(f, 2) - a);
}

/// Per-vertex normals as the normalized area-weighted mean of incident face
/// normals. Zero-area faces contribute nothing; vertices with no usable
/// contribution get +z.
inline TriMesh compute_vertex_normals(TriMesh mesh) {
    std::vector<Vec3> acc(mesh.positions.size(), Vec3::Zero());
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
        // |cross| is twice the area, so the raw cross product is already area weighted.
        const Vec3 n = face_normal_unnormalized(mesh, f);
        for (int k = 0; k < 3; ++k) acc[mesh.faces[f].position(k)] += n;
    }
    mesh.normals.resize(acc.size());
    for (std::size_t i = 0; i < acc.size(); ++i) {
        const double len = acc[i].norm();
        mesh.normals[i] = len > 1e-300 ? Vec3(acc[i] / len) : Vec3::UnitZ();
    }
    for (Face& face : mesh.faces)
        for (Corner& c : face.corners) c.normal = c.position;
    return mesh;
}

struct BoundingBox {
    Vec3 min;
    Vec3 max;
    Vec3 center() const { return 0.5 * (min + max); }
};

inline BoundingBox bounding_box(const TriMesh& mesh) {
    if (mesh.positions.empty()) throw MeshError("mesh has no positions");
    BoundingBox box{mesh.positions.front(), mesh.positions.front()};
    for (const Vec3& p : mesh.positions) {
        box.min = box.min.cwiseMin(p);
        box.max = box.max.cwiseMax(p);
    }
    return box;
}

/// Centers the bounding box at the origin and scales uniformly so the
/// farthest vertex lies at distance 1.
inline TriMesh normalize_mesh(TriMesh mesh) {
    const BoundingBox box = bounding_box(mesh);
    if ((box.max - box.min).maxCoeff() <= 0.0) throw MeshError("degenerate mesh: zero extent");
    const Vec3 c = box.center();
    double radius = 0.0;
    for (const Vec3& p : mesh.positions) radius = std::max(radius, (p - c).norm());
    for (Vec3& p : mesh.positions) p = (p - c) / radius;
    return mesh;
}

struct ComponentLabeling {
    std::vector<int> face_labels;
    int count = 0;
};

namespace detail {

class DisjointSet {
public:
    explicit DisjointSet(std::size_t n) : parent_(n), rank_(n, 0) { std::iota(parent_.begin(), parent_.end(), 0); }

    std::size_t find(std::size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (rank_[a] < rank_[b]) std::swap(a, b);
        parent_[b] = a;
        if (rank_[a] == rank_[b]) ++rank_[a];
    }

private:
    std::vector<std::size_t> parent_;
    std::vector<unsigned char> rank_;
};

}  // namespace detail

/// Faces are connected when they share a position index. Labels are dense
/// and assigned in order of each component's lowest face index.
inline ComponentLabeling connected_components(const TriMesh& mesh) {
    detail::DisjointSet sets(mesh.positions.size());
    for (const Face& face : mesh.faces) {
        sets.unite(face.position(0), face.position(1));
        sets.unite(face.position(0), face.position(2));
    }
    ComponentLabeling out;
    out.face_labels.resize(mesh.faces.size());
    std::vector<int> root_label(mesh.positions.size(), -1);
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
        const std::size_t root = sets.find(mesh.faces[f].position(0));
        if (root_label[root] < 0) root_label[root] = out.count++;
        out.face_labels[f] = root_label[root];
    }
    return out;
}

/// Packs every triangle into its own chart: pairs of triangles share one
/// square cell of a regular grid, split along the anti-diagonal, with a small
/// inset so neighbouring charts never share texels.
inline TriMesh generate_trivial_uvs(TriMesh mesh, int atlas_size = 1024) {
    const std::size_t pairs = (mesh.faces.size() + 1) / 2;
    const int grid = std::max(1, static_cast<int>(std::ceil(std::sqrt(static_cast<double>(pairs)))));
    const double cell = 1.0 / grid;
    const double inset = std::min(cell * 0.25, 1.5 / std::max(atlas_size, 1));
    mesh.uvs.clear();
    mesh.uvs.reserve(mesh.faces.size() * 3);
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
        const std::size_t pair = f / 2;
        const double u0 = static_cast<double>(pair % grid) * cell;
        const double v0 = static_cast<double>(pair / grid) * cell;
        const double lo = inset;
        const double hi = cell - inset;
        std::array<Vec2, 3> tri;
        if (f % 2 == 0) {
            tri = {Vec2(u0 + lo, v0 + lo), Vec2(u0 + hi - inset, v0 + lo), Vec2(u0 + lo, v0 + hi - inset)};
        } else {
            tri = {Vec2(u0 + hi, v0 + hi), Vec2(u0 + lo + inset, v0 + hi), Vec2(u0 + hi, v0 + lo + inset)};
        }
        for (int k = 0; k < 3; ++k) {
            mesh.faces[f].corners[k].uv = static_cast<int>(mesh.uvs.size());
            mesh.uvs.push_back(tri[k]);
        }
    }
    mesh.needs_uvs = false;
    mesh.uv_generated = true;
    return mesh;
}

/// Appends `other` to `mesh`, offsetting indices.
inline void append_mesh(TriMesh& mesh, const TriMesh& other) {
    const int po = static_cast<int>(mesh.positions.size());
    const int no = static_cast<int>(mesh.normals.size());
    const int uo = static_cast<int>(mesh.uvs.size());
    mesh.positions.insert(mesh.positions.end(), other.positions.begin(), other.positions.end());
    mesh.normals.insert(mesh.normals.end(), other.normals.begin(), other.normals.end());
    mesh.uvs.insert(mesh.uvs.end(), other.uvs.begin(), other.uvs.end());
    for (Face face : other.faces) {
        for (Corner& c : face.corners) {
            c.position += po;
            c.normal = c.normal >= 0 ? c.normal + no : -1;
            c.uv = c.uv >= 0 ? c.uv + uo : -1;
        }
        mesh.faces.push_back(face);
    }
}

}  // namespace meshtex
