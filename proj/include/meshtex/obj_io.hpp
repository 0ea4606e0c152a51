#pragma once

// Wavefront OBJ subset: v, vt, vn, f, o, g. Materials are ignored on input.

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "meshtex/mesh.hpp"

namespace meshtex {

struct ObjParseError : MeshError {
    ObjParseError(std::size_t line, const std::string& what)
        : MeshError("line " + std::to_string(line) + ": " + what), line_number(line) {}
    std::size_t line_number;
};

namespace detail {

inline std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
        const std::size_t start = i;
        while (i < s.size() && s[i] != ' ' && s[i] != '\t' && s[i] != '\r') ++i;
        if (i > start) out.push_back(s.substr(start, i - start));
    }
    return out;
}

inline double parse_double(std::string_view tok, std::size_t line) {
    // std::from_chars for double is available in libstdc++ 11.
    double v = 0.0;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
        throw ObjParseError(line, "invalid number '" + std::string(tok) + "'");
    return v;
}

/// Resolves a 1-based (or negative, relative) OBJ index to 0-based.
inline int resolve_index(std::string_view tok, std::size_t count, std::size_t line, const char* kind) {
    long v = 0;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
        throw ObjParseError(line, std::string("invalid ") + kind + " index '" + std::string(tok) + "'");
    const long idx = v > 0 ? v - 1 : static_cast<long>(count) + v;
    if (v == 0 || idx < 0 || idx >= static_cast<long>(count))
        throw ObjParseError(line, std::string(kind) + " index " + std::to_string(v) + " out of range (have " +
                                      std::to_string(count) + ")");
    return static_cast<int>(idx);
}

}  // namespace detail

/// Parses OBJ text. Polygons are fan-triangulated; triangles that repeat a
/// position index are dropped. Missing normals are computed; missing UVs set
/// `needs_uvs`.
inline TriMesh parse_obj(std::istream& in) {
    TriMesh mesh;
    std::vector<Vec3> raw_normals;
    bool all_uv = true;
    bool all_normal = true;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        const std::string_view content = std::string_view(line).substr(0, hash);
        const auto toks = detail::split_ws(content);
        if (toks.empty()) continue;
        const std::string_view kw = toks[0];
        if (kw == "v") {
            if (toks.size() < 4) throw ObjParseError(line_no, "vertex needs 3 coordinates");
            mesh.positions.emplace_back(detail::parse_double(toks[1], line_no), detail::parse_double(toks[2], line_no),
                                        detail::parse_double(toks[3], line_no));
        } else if (kw == "vt") {
            if (toks.size() < 3) throw ObjParseError(line_no, "texture coordinate needs 2 components");
            mesh.uvs.emplace_back(detail::parse_double(toks[1], line_no), detail::parse_double(toks[2], line_no));
        } else if (kw == "vn") {
            if (toks.size() < 4) throw ObjParseError(line_no, "normal needs 3 components");
            raw_normals.emplace_back(detail::parse_double(toks[1], line_no), detail::parse_double(toks[2], line_no),
                                     detail::parse_double(toks[3], line_no));
        } else if (kw == "f") {
            if (toks.size() < 4) throw ObjParseError(line_no, "face needs at least 3 corners");
            std::vector<Corner> poly;
            for (std::size_t i = 1; i < toks.size(); ++i) {
                std::string_view t = toks[i];
                Corner c;
                const auto s1 = t.find('/');
                c.position = detail::resolve_index(t.substr(0, s1), mesh.positions.size(), line_no, "vertex");
                if (s1 != std::string_view::npos) {
                    const std::string_view rest = t.substr(s1 + 1);
                    const auto s2 = rest.find('/');
                    const std::string_view vt = rest.substr(0, s2);
                    if (!vt.empty()) c.uv = detail::resolve_index(vt, mesh.uvs.size(), line_no, "texcoord");
                    if (s2 != std::string_view::npos && s2 + 1 < rest.size())
                        c.normal = detail::resolve_index(rest.substr(s2 + 1), raw_normals.size(), line_no, "normal");
                }
                all_uv = all_uv && c.uv >= 0;
                all_normal = all_normal && c.normal >= 0;
                poly.push_back(c);
            }
            for (std::size_t k = 1; k + 1 < poly.size(); ++k) {
                Face face{{poly[0], poly[k], poly[k + 1]}};
                if (face.position(0) == face.position(1) || face.position(1) == face.position(2) ||
                    face.position(0) == face.position(2))
                    continue;
                mesh.faces.push_back(face);
            }
        }
        // o, g, s, mtllib, usemtl and unknown statements are ignored.
    }
    if (mesh.faces.empty()) throw MeshError("empty mesh: no faces");

    if (!all_uv || mesh.uvs.empty()) {
        mesh.uvs.clear();
        for (Face& f : mesh.faces)
            for (Corner& c : f.corners) c.uv = -1;
        mesh.needs_uvs = true;
    }
    bool normals_ok = all_normal && !raw_normals.empty();
    if (normals_ok) {
        for (Vec3& n : raw_normals) {
            const double len = n.norm();
            if (!(len > 1e-12)) {
                normals_ok = false;
                break;
            }
            n /= len;
        }
    }
    if (normals_ok) {
        mesh.normals = std::move(raw_normals);
    } else {
        mesh = compute_vertex_normals(std::move(mesh));
    }
    return mesh;
}

inline TriMesh load_mesh(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw MeshError("cannot open " + path);
    return parse_obj(in);
}

inline TriMesh parse_obj_string(const std::string& text) {
    std::istringstream in(text);
    return parse_obj(in);
}

/// Writes OBJ text with full-precision coordinates. When `mtl_file` is
/// non-empty, emits `mtllib` and `usemtl <material>` headers.
inline void write_obj(std::ostream& out, const TriMesh& mesh, const std::string& mtl_file = {},
                      const std::string& material = "atlas") {
    char buf[128];
    out << "# meshtex\n";
    if (!mtl_file.empty()) out << "mtllib " << mtl_file << "\n";
    for (const Vec3& p : mesh.positions) {
        std::snprintf(buf, sizeof buf, "v %.17g %.17g %.17g\n", p.x(), p.y(), p.z());
        out << buf;
    }
    const bool uv = mesh.has_uvs();
    if (uv)
        for (const Vec2& t : mesh.uvs) {
            std::snprintf(buf, sizeof buf, "vt %.17g %.17g\n", t.x(), t.y());
            out << buf;
        }
    for (const Vec3& n : mesh.normals) {
        std::snprintf(buf, sizeof buf, "vn %.17g %.17g %.17g\n", n.x(), n.y(), n.z());
        out << buf;
    }
    if (!mtl_file.empty()) out << "usemtl " << material << "\n";
    for (const Face& f : mesh.faces) {
        out << "f";
        for (const Corner& c : f.corners) {
            out << ' ' << c.position + 1 << '/';
            if (uv) out << c.uv + 1;
            out << '/' << c.normal + 1;
        }
        out << "\n";
    }
}

inline void save_obj(const std::string& path, const TriMesh& mesh, const std::string& mtl_file = {},
                     const std::string& material = "atlas") {
    std::ofstream out(path);
    if (!out) throw MeshError("cannot write " + path);
    write_obj(out, mesh, mtl_file, material);
    if (!out) throw MeshError("write failed: " + path);
}

}  // namespace meshtex
