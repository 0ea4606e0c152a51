#pragma once

// Atlas hole filling and OBJ + MTL + PNG export.

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "meshtex/atlas.hpp"
#include "meshtex/obj_io.hpp"
#include "meshtex/png_io.hpp"

namespace meshtex {

/// Fills unseen texels so bilinear lookups never pick up empty texels.
/// A few rings of neighbour averaging extend the charts first (seam
/// gutters); whatever is still empty is filled by pull-push over a mip
/// pyramid of seen-weighted averages. Seen texels are never modified, so a
/// fully seen atlas comes back unchanged.
inline RgbImage dilate_atlas(const TextureAtlas& atlas, int rings = 4) {
    const int w = atlas.width(), h = atlas.height();
    RgbImage out = atlas.rgb_image();
    if (w == 0 || h == 0) return out;
    std::vector<std::uint8_t> filled(static_cast<std::size_t>(w) * h);
    std::size_t filled_count = 0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            filled[static_cast<std::size_t>(y) * w + x] = atlas.seen(x, y);
            filled_count += atlas.seen(x, y);
        }
    if (filled_count == 0 || filled_count == filled.size()) return out;

    for (int ring = 0; ring < rings; ++ring) {
        std::vector<std::pair<std::size_t, Rgb>> updates;
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                if (filled[static_cast<std::size_t>(y) * w + x]) continue;
                int sum[3] = {0, 0, 0};
                int cnt = 0;
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int nx = x + dx, ny = y + dy;
                        if ((dx == 0 && dy == 0) || nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
                        if (!filled[static_cast<std::size_t>(ny) * w + nx]) continue;
                        for (int c = 0; c < 3; ++c) sum[c] += out.at(nx, ny, c);
                        ++cnt;
                    }
                if (cnt == 0) continue;
                Rgb c;
                for (int k = 0; k < 3; ++k) c[k] = static_cast<std::uint8_t>((sum[k] + cnt / 2) / cnt);
                updates.emplace_back(static_cast<std::size_t>(y) * w + x, c);
            }
        if (updates.empty()) break;
        for (const auto& [i, c] : updates) {
            out.set_pixel(static_cast<int>(i % w), static_cast<int>(i / w), c);
            filled[i] = 1;
        }
    }

    // Pull: level k+1 averages the filled texels of 2x2 blocks of level k.
    struct Level {
        int w, h;
        std::vector<double> rgb;  // premultiplied by weight
        std::vector<double> weight;
    };
    std::vector<Level> levels;
    Level base{w, h, std::vector<double>(static_cast<std::size_t>(w) * h * 3), std::vector<double>(static_cast<std::size_t>(w) * h)};
    for (std::size_t i = 0; i < filled.size(); ++i)
        if (filled[i]) {
            base.weight[i] = 1.0;
            for (int c = 0; c < 3; ++c) base.rgb[i * 3 + c] = out.data()[i * 3 + c];
        }
    levels.push_back(std::move(base));
    while (levels.back().w > 1 || levels.back().h > 1) {
        const Level& f = levels.back();
        Level c{(f.w + 1) / 2, (f.h + 1) / 2, {}, {}};
        c.rgb.assign(static_cast<std::size_t>(c.w) * c.h * 3, 0.0);
        c.weight.assign(static_cast<std::size_t>(c.w) * c.h, 0.0);
        for (int y = 0; y < f.h; ++y)
            for (int x = 0; x < f.w; ++x) {
                const std::size_t fi = static_cast<std::size_t>(y) * f.w + x;
                const std::size_t ci = static_cast<std::size_t>(y / 2) * c.w + x / 2;
                c.weight[ci] += f.weight[fi];
                for (int k = 0; k < 3; ++k) c.rgb[ci * 3 + k] += f.rgb[fi * 3 + k];
            }
        levels.push_back(std::move(c));
    }
    // Push: empty texels inherit the normalized average of their parent.
    for (std::size_t l = levels.size() - 1; l-- > 0;) {
        Level& f = levels[l];
        const Level& c = levels[l + 1];
        for (int y = 0; y < f.h; ++y)
            for (int x = 0; x < f.w; ++x) {
                const std::size_t fi = static_cast<std::size_t>(y) * f.w + x;
                if (f.weight[fi] > 0.0) continue;
                const std::size_t ci = static_cast<std::size_t>(y / 2) * c.w + x / 2;
                if (c.weight[ci] <= 0.0) continue;
                f.weight[fi] = 1.0;
                for (int k = 0; k < 3; ++k) f.rgb[fi * 3 + k] = c.rgb[ci * 3 + k] / c.weight[ci];
            }
    }
    const Level& top = levels.front();
    for (std::size_t i = 0; i < filled.size(); ++i) {
        if (filled[i]) continue;
        const double wgt = top.weight[i] > 0.0 ? top.weight[i] : 1.0;
        for (int c = 0; c < 3; ++c) out.data()[i * 3 + c] = to_u8(top.rgb[i * 3 + c] / wgt);
    }
    return out;
}

inline std::string mtl_text(const std::string& material, const std::string& texture_file) {
    return "# meshtex\nnewmtl " + material +
           "\nKa 1 1 1\nKd 1 1 1\nKs 0 0 0\nd 1\nillum 1\nmap_Kd " + texture_file + "\n";
}

struct ExportPaths {
    std::filesystem::path obj;
    std::filesystem::path mtl;
    std::filesystem::path texture;
};

/// Writes <dir>/<stem>.obj, <dir>/<stem>.mtl and <dir>/<stem>_atlas.png.
inline ExportPaths export_textured_mesh(const TriMesh& mesh, const TextureAtlas& atlas,
                                        const std::filesystem::path& dir, const std::string& stem = "mesh") {
    if (!mesh.has_uvs()) throw MeshError("cannot export a textured mesh without UVs");
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    ExportPaths paths{dir / (stem + ".obj"), dir / (stem + ".mtl"), dir / (stem + "_atlas.png")};
    write_png(paths.texture.string(), dilate_atlas(atlas));
    {
        std::ofstream mtl(paths.mtl);
        if (!mtl) throw IoError("cannot write " + paths.mtl.string());
        mtl << mtl_text("atlas", paths.texture.filename().string());
        if (!mtl) throw IoError("write failed: " + paths.mtl.string());
    }
    try {
        save_obj(paths.obj.string(), mesh, paths.mtl.filename().string(), "atlas");
    } catch (const MeshError& e) {
        throw IoError(e.what());
    }
    return paths;
}

}  // namespace meshtex
