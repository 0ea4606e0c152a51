#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "fixtures.hpp"
#include "meshtex/edges.hpp"
#include "meshtex/primitives.hpp"
#include "oracles.hpp"

using namespace meshtex;

namespace {

const CannyParams kDefault{};

bool binary_valued(const EdgeMap& e) {
    for (auto v : e.data())
        if (v != 0 && v != 255) return false;
    return true;
}

bool subset(const EdgeMap& a, const EdgeMap& b) {
    for (std::size_t i = 0; i < a.data().size(); ++i)
        if (a.data()[i] && !b.data()[i]) return false;
    return true;
}

EdgeMap random_edges(std::mt19937_64& rng, int w, int h) {
    EdgeMap e(w, h, 0);
    for (auto& v : e.data()) v = rng() % 3 == 0 ? 255 : 0;
    return e;
}

}  // namespace

TEST(Canny, ParamsValidation) {
    EXPECT_THROW((CannyParams{0.0, 10, 20}.validate()), std::invalid_argument);
    EXPECT_THROW((CannyParams{1.0, 30, 20}.validate()), std::invalid_argument);
    EXPECT_THROW((CannyParams{1.0, -1, 20}.validate()), std::invalid_argument);
    EXPECT_THROW((CannyParams{1.0, 10, 2000}.validate()), std::invalid_argument);
    EXPECT_NO_THROW(kDefault.validate());
}

TEST(Canny, TapsAreSymmetricAndNormalized) {
    for (double s : {0.5, 1.0, 1.4, 2.3}) {
        const auto t = gaussian_taps(s);
        const int r = static_cast<int>(t.size() / 2);
        EXPECT_EQ(r, std::max(1, static_cast<int>(std::ceil(3 * s))));
        std::int64_t sum = 0;
        for (std::size_t i = 0; i < t.size(); ++i) {
            EXPECT_EQ(t[i], t[t.size() - 1 - i]);
            sum += t[i];
        }
        EXPECT_NEAR(static_cast<double>(sum), 1024.0, 8.0);
    }
}

TEST(Canny, ConstantImageIsEmpty) {
    for (int v : {0, 77, 255}) EXPECT_EQ(count_nonzero(canny(GrayImage(40, 30, static_cast<std::uint8_t>(v)), kDefault)), 0u);
}

TEST(Canny, StepGivesOneColumn) {
    const GrayImage img = fixtures::step_image(64, 48, 32);
    const EdgeMap e = canny(img, kDefault);
    EXPECT_EQ(e, oracle::canny(img, kDefault.sigma, kDefault.low, kDefault.high));
    int column = -1;
    for (int y = 0; y < 48; ++y) {
        int count = 0;
        for (int x = 0; x < 64; ++x)
            if (e.at(x, y)) {
                ++count;
                if (column < 0) column = x;
                EXPECT_EQ(x, column);
            }
        EXPECT_EQ(count, 1) << "row " << y;
    }
    EXPECT_TRUE(column == 31 || column == 32);
}

TEST(Canny, DiskPerimeter) {
    const GrayImage img = fixtures::disk_image(128, 20.0);
    const EdgeMap e = canny(img, kDefault);
    EXPECT_EQ(e, oracle::canny(img, kDefault.sigma, kDefault.low, kDefault.high));
    const double perimeter = 2.0 * std::numbers::pi * 20.0;
    const double n = static_cast<double>(count_nonzero(e));
    EXPECT_GE(n, 0.8 * perimeter);
    EXPECT_LE(n, 1.3 * perimeter);
}

TEST(Canny, RandomImagesMatchOracle) {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        const GrayImage img = trial % 2 ? fixtures::random_gray(rng, 48, 40) : fixtures::random_shapes(rng, 48, 40);
        const CannyParams p{0.6 + 0.2 * (trial % 7), 20.0 + trial, 60.0 + 3 * trial};
        const EdgeMap e = canny(img, p);
        EXPECT_TRUE(binary_valued(e));
        EXPECT_EQ(e, oracle::canny(img, p.sigma, p.low, p.high)) << "trial " << trial;
    }
}

TEST(Canny, HysteresisLinksWeakPixels) {
    // A ramped step: strong on the left, weak on the right. Hysteresis keeps
    // the weak half only because it connects to the strong half.
    GrayImage img(64, 32, 0);
    for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 64; ++x)
            if (y >= 16) img.at(x, y) = static_cast<std::uint8_t>(x < 32 ? 255 : 40);
    const EdgeMap linked = canny(img, CannyParams{1.4, 100, 200});
    const EdgeMap isolated = canny(img, CannyParams{1.4, 100, 1000});
    EXPECT_EQ(linked, oracle::canny(img, 1.4, 100, 200));
    EXPECT_GT(count_nonzero(linked), 40u);
    EXPECT_EQ(count_nonzero(isolated), 0u);
}

TEST(Compose, Algebra) {
    std::mt19937_64 rng(32);
    for (int trial = 0; trial < 20; ++trial) {
        const EdgeMap a = random_edges(rng, 17, 13), b = random_edges(rng, 17, 13), c = random_edges(rng, 17, 13);
        const EdgeMap empty(17, 13, 0);
        EXPECT_EQ(compose_edges({a, empty}), a);
        EXPECT_EQ(compose_edges({a, a}), a);
        EXPECT_EQ(compose_edges({a, b}), compose_edges({b, a}));
        EXPECT_EQ(compose_edges({compose_edges({a, b}), c}), compose_edges({a, compose_edges({b, c})}));
        const EdgeMap ab = compose_edges({a, b});
        for (std::size_t i = 0; i < ab.data().size(); ++i) EXPECT_EQ(ab.data()[i], std::max(a.data()[i], b.data()[i]));
    }
}

TEST(Compose, Errors) {
    EXPECT_THROW(compose_edges({}), std::invalid_argument);
    EXPECT_THROW(compose_edges({EdgeMap(4, 4), EdgeMap(4, 5)}), DimensionError);
}

TEST(Sources, ParseAndPrint) {
    EXPECT_EQ(parse_edge_sources("cc,depth,normal"), (EdgeSources{true, true, true}));
    EXPECT_EQ(parse_edge_sources("depth"), (EdgeSources{false, true, false}));
    EXPECT_EQ(parse_edge_sources("normal,cc"), (EdgeSources{true, false, true}));
    EXPECT_EQ(to_string(EdgeSources{true, false, true}), "cc,normal");
    EXPECT_THROW(parse_edge_sources("cc,curvature"), std::invalid_argument);
    EXPECT_THROW(parse_edge_sources(""), std::invalid_argument);
}

TEST(Palette, DrawsLowBytesOfEngineOutput) {
    std::mt19937_64 a(9), b(9);
    const auto pal = random_palette(a, 3);
    for (const Rgb& c : pal) {
        const std::uint64_t v = b();
        EXPECT_EQ(c, (Rgb{static_cast<std::uint8_t>(v), static_cast<std::uint8_t>(v >> 8), static_cast<std::uint8_t>(v >> 16)}));
    }
}

TEST(CcEdges, DeterministicAndMonotone) {
    std::mt19937_64 rng(33);
    const TriMesh m = normalize_mesh(fixtures::random_multipart(rng, 6, 300));
    const auto labels = connected_components(m);
    const ViewSpec v{40, 20, 2.2, 40, 64, 64};
    const GBuffer g = rasterize(m, v);
    const EdgeMap e1 = cc_edges(g, labels, 1, 7, kDefault);
    const EdgeMap e5 = cc_edges(g, labels, 5, 7, kDefault);
    EXPECT_EQ(e5, cc_edges(m, labels, v, 5, 7, kDefault));
    EXPECT_TRUE(subset(e1, e5));
    EXPECT_TRUE(subset(cc_edges(g, labels, 3, 7, kDefault), e5));
    EXPECT_THROW(cc_edges(g, labels, 0, 7, kDefault), std::invalid_argument);
}

TEST(CcEdges, SingleComponentOnlyAtSilhouette) {
    const TriMesh m = normalize_mesh(primitives::icosphere(2));
    const auto labels = connected_components(m);
    const ViewSpec v{0, 0, 3.0, 40, 64, 64};
    const GBuffer g = rasterize(m, v);
    const EdgeMap e = cc_edges(g, labels, 5, 1, kDefault);
    const BinaryImage band = oracle::dilate(oracle::silhouette_boundary(g.foreground_mask()), 2);
    EXPECT_GT(count_nonzero(e), 0u);
    EXPECT_TRUE(subset(e, band));
}

// Independent union: oracle labels, per-pixel coloring and oracle Canny, with
// the same palette draws made pairwise distinct.
static EdgeMap oracle_cc_union(const TriMesh& m, const GBuffer& g, int n_iters, std::uint64_t seed) {
    const auto labels = oracle::flood_fill_components(m);
    const int count = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
    std::mt19937_64 rng(seed);
    EdgeMap acc(g.width, g.height, 0);
    for (int it = 0; it < n_iters; ++it) {
        auto palette = random_palette(rng, count);
        for (std::size_t i = 0; i < palette.size(); ++i)
            for (std::size_t j = 0; j < i; ++j)
                if (palette[i] == palette[j]) palette[i][0] = static_cast<std::uint8_t>(palette[i][0] + 1);
        GrayImage gray(g.width, g.height, 255);
        for (int y = 0; y < g.height; ++y)
            for (int x = 0; x < g.width; ++x)
                if (const auto f = g.face(x, y)) {
                    const Rgb c = palette[labels[*f]];
                    gray.at(x, y) = static_cast<std::uint8_t>((299 * c[0] + 587 * c[1] + 114 * c[2] + 500) / 1000);
                }
        const EdgeMap e = oracle::canny(gray, kDefault.sigma, kDefault.low, kDefault.high);
        for (std::size_t i = 0; i < acc.data().size(); ++i) acc.data()[i] = std::max(acc.data()[i], e.data()[i]);
    }
    return acc;
}

static BinaryImage seam_of(const GBuffer& g, const ComponentLabeling& labels) {
    BinaryImage seam(g.width, g.height, 0);
    for (int y = 0; y < g.height; ++y)
        for (int x = 0; x + 1 < g.width; ++x) {
            const auto a = g.face(x, y), b = g.face(x + 1, y);
            if (a && b && labels.face_labels[*a] != labels.face_labels[*b]) seam.at(x, y) = seam.at(x + 1, y) = 255;
        }
    return seam;
}

TEST(CcEdges, AbuttingBoxesMatchDistinctPaletteOracle) {
    const TriMesh m = fixtures::abutting_boxes();
    const auto labels = connected_components(m);
    ASSERT_EQ(labels.count, 2);
    const GBuffer g = rasterize(m, ViewSpec{0, 0, 2.2, 40, 64, 64});
    for (std::uint64_t seed = 0; seed < 10; ++seed)
        EXPECT_EQ(cc_edges(g, labels, 5, seed, kDefault), oracle_cc_union(m, g, 5, seed)) << "seed " << seed;
}

TEST(CcEdges, SeamVisibleWhenPaletteContrastIsHigh) {
    const TriMesh m = fixtures::abutting_boxes();
    const auto labels = connected_components(m);
    const GBuffer g = rasterize(m, ViewSpec{0, 0, 2.2, 40, 64, 64});
    const BinaryImage seam = seam_of(g, labels);
    const BinaryImage interior = oracle::dilate(oracle::silhouette_boundary(g.foreground_mask()), 3);
    // seed 12 draws a first palette whose two lumas differ by 117
    const EdgeMap e = oracle::dilate(cc_edges(g, labels, 5, 12, kDefault), 1);
    std::size_t rows = 0, found = 0;
    for (int y = 0; y < 64; ++y) {
        bool has_seam = false, hit = false;
        for (int x = 0; x < 64; ++x)
            if (seam.at(x, y) && !interior.at(x, y)) {
                has_seam = true;
                hit = hit || e.at(x, y) != 0;
            }
        rows += has_seam;
        found += hit;
    }
    ASSERT_GT(rows, 10u);
    EXPECT_EQ(found, rows);
    // Depth and normals cannot see the seam: the front faces are coplanar.
    const EdgeMap geo = compose_edges({depth_edges(g, kDefault), normal_edges(g, kDefault)});
    for (int y = 0; y < 64; ++y)
        for (int x = 0; x < 64; ++x)
            if (seam.at(x, y) && !interior.at(x, y)) {
                EXPECT_EQ(geo.at(x, y), 0) << x << "," << y;
            }
}

TEST(DepthEdges, MatchCannyOfDepthImage) {
    TriMesh m = primitives::quad(-2, -2, 0, 2, 0.2);
    append_mesh(m, primitives::quad(-3, -3, 3, 3, -0.8));
    const ViewSpec v{0, 0, 2.2, 40, 64, 64};
    const GBuffer g = rasterize(m, v);
    const EdgeMap e = depth_edges(m, v, kDefault);
    EXPECT_EQ(e, oracle::canny(depth_to_image(g), kDefault.sigma, kDefault.low, kDefault.high));
    // the discontinuity sits at x = 0 in world space, the image center column
    int near_center = 0;
    for (int y = 0; y < 64; ++y) near_center += e.at(31, y) || e.at(32, y);
    EXPECT_GE(near_center, 60);
    EXPECT_EQ(count_nonzero(depth_edges(GBuffer(32, 32), kDefault)), 0u);
}

TEST(DepthEdges, SphereSilhouetteRing) {
    const TriMesh m = normalize_mesh(primitives::icosphere(3));
    const ViewSpec v{0, 0, 3.0, 40, 64, 64};
    const GBuffer g = rasterize(m, v);
    const EdgeMap e = depth_edges(g, kDefault);
    const BinaryImage boundary = oracle::silhouette_boundary(g.foreground_mask());
    EXPECT_TRUE(subset(e, oracle::dilate(boundary, 2)));
    EXPECT_GE(oracle::covered_fraction(boundary, oracle::dilate(e, 2)), 0.99);
}

TEST(NormalEdges, FlatPlaneHasNoInteriorEdges) {
    const double h = 2.2 * std::tan(20.0 * std::numbers::pi / 180.0) * 0.6;
    const TriMesh m = primitives::quad(-h, -h, h, h);
    const GBuffer g = rasterize(m, ViewSpec{0, 0, 2.2, 40, 64, 64});
    const EdgeMap e = normal_edges(g, kDefault);
    EXPECT_TRUE(subset(e, oracle::dilate(oracle::silhouette_boundary(g.foreground_mask()), 2)));
}

TEST(NormalEdges, SphereOnlySilhouette) {
    const TriMesh m = normalize_mesh(primitives::icosphere(3));
    const GBuffer g = rasterize(m, ViewSpec{30, 10, 3.0, 40, 64, 64});
    const EdgeMap e = normal_edges(g, kDefault);
    EXPECT_GT(count_nonzero(e), 0u);
    EXPECT_TRUE(subset(e, oracle::dilate(oracle::silhouette_boundary(g.foreground_mask()), 2)));
}

TEST(NormalEdges, CubeCornerMatchesOracle) {
    const TriMesh m = normalize_mesh(primitives::cube(0.5));
    const ViewSpec v{45, 35.26, 3.0, 40, 96, 96};
    const GBuffer g = rasterize(m, v);
    const EdgeMap e = normal_edges(g, kDefault);
    EXPECT_EQ(e, oracle::canny(to_gray(normals_to_image(g)), kDefault.sigma, kDefault.low, kDefault.high));
    // with a lower threshold the three dihedral creases show up in the interior
    const CannyParams soft{1.4, 20, 40};
    const EdgeMap creases = normal_edges(g, soft);
    const BinaryImage band = oracle::dilate(oracle::silhouette_boundary(g.foreground_mask()), 2);
    std::size_t interior = 0;
    for (std::size_t i = 0; i < creases.data().size(); ++i) interior += creases.data()[i] && !band.data()[i];
    EXPECT_GT(interior, 30u);
}

TEST(Extract, OnlyRequestedSources) {
    const TriMesh m = fixtures::abutting_boxes();
    const auto labels = connected_components(m);
    const GBuffer g = rasterize(m, ViewSpec{30, 20, 2.2, 40, 64, 64});
    EdgeSettings s;
    s.sources = parse_edge_sources("depth");
    const EdgeSet d = extract_edges(g, labels, s);
    EXPECT_FALSE(d.cc);
    EXPECT_FALSE(d.normal);
    ASSERT_TRUE(d.depth);
    EXPECT_EQ(d.composed, *d.depth);
    EXPECT_EQ(d.composed, depth_edges(g, s.canny));

    s.sources = EdgeSources{};
    const EdgeSet all = extract_edges(g, labels, s);
    ASSERT_TRUE(all.cc && all.depth && all.normal);
    EXPECT_EQ(all.composed, compose_edges({*all.cc, *all.depth, *all.normal}));
    for (const EdgeMap* e : {&*all.cc, &*all.depth, &*all.normal, &all.composed}) {
        EXPECT_TRUE(binary_valued(*e));
        EXPECT_EQ(e->width(), 64);
        EXPECT_EQ(e->height(), 64);
    }
    s.sources = EdgeSources{false, false, false};
    EXPECT_THROW(extract_edges(g, labels, s), std::invalid_argument);
}

TEST(Extract, ComposedContainsSilhouette) {
    const auto meshes = fixtures::solid_meshes();
    for (std::size_t i = 0; i < meshes.size(); ++i) {
        const auto labels = connected_components(meshes[i]);
        for (double az : {30.0, 150.0, 270.0}) {
            const GBuffer g = rasterize(meshes[i], ViewSpec{az, 15, 2.2, 40, 64, 64});
            const EdgeSet all = extract_edges(g, labels, EdgeSettings{});
            const BinaryImage boundary = oracle::silhouette_boundary(g.foreground_mask());
            EXPECT_DOUBLE_EQ(oracle::covered_fraction(boundary, oracle::dilate(all.composed, 2)), 1.0)
                << "mesh " << i << " az " << az;
        }
    }
}
