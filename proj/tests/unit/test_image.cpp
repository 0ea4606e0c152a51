#include <gtest/gtest.h>

#include <random>

#include "meshtex/base64.hpp"
#include "meshtex/image.hpp"
#include "meshtex/png_io.hpp"

using namespace meshtex;

TEST(Image, ConstructAndIndex) {
    RgbImage img(3, 2, 7);
    EXPECT_EQ(img.width(), 3);
    EXPECT_EQ(img.height(), 2);
    EXPECT_EQ(img.data().size(), 18u);
    img.set_pixel(2, 1, Rgb{1, 2, 3});
    EXPECT_EQ(img.pixel(2, 1), (Rgb{1, 2, 3}));
    EXPECT_EQ(img.at(2, 1, 2), 3);
    EXPECT_EQ(img.at(0, 0, 1), 7);
    EXPECT_THROW(RgbImage(-1, 2), DimensionError);
}

TEST(Image, Luma601) {
    EXPECT_EQ(luma601(255, 255, 255), 255);
    EXPECT_EQ(luma601(0, 0, 0), 0);
    EXPECT_EQ(luma601(255, 0, 0), 76);
    EXPECT_EQ(luma601(0, 255, 0), 150);
    EXPECT_EQ(luma601(0, 0, 255), 29);
    RgbImage img(1, 1);
    img.set_pixel(0, 0, Rgb{10, 200, 30});
    EXPECT_EQ(to_gray(img).at(0, 0), luma601(10, 200, 30));
}

TEST(Image, BinaryConversions) {
    GrayImage g(2, 1);
    g.at(0, 0) = 0;
    g.at(1, 0) = 3;
    const BinaryImage b = to_binary(g);
    EXPECT_EQ(b.at(0, 0), 0);
    EXPECT_EQ(b.at(1, 0), 255);
    EXPECT_EQ(count_nonzero(b), 1u);
}

TEST(Image, BilinearAtPixelCentersIsExact) {
    std::mt19937_64 rng(1);
    RgbImage img(5, 4);
    for (auto& v : img.data()) v = static_cast<std::uint8_t>(rng());
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 5; ++x) {
            const auto s = sample_bilinear(img, x + 0.5, y + 0.5);
            for (int c = 0; c < 3; ++c) EXPECT_DOUBLE_EQ(s[c], img.at(x, y, c));
        }
    // halfway between two columns
    const auto mid = sample_bilinear(img, 2.0, 0.5);
    for (int c = 0; c < 3; ++c) EXPECT_DOUBLE_EQ(mid[c], 0.5 * (img.at(1, 0, c) + img.at(2, 0, c)));
}

TEST(Image, ResizeToSameSizeIsIdentity) {
    std::mt19937_64 rng(2);
    RgbImage img(7, 3);
    for (auto& v : img.data()) v = static_cast<std::uint8_t>(rng());
    EXPECT_EQ(resize_bilinear(img, 7, 3), img);
}

TEST(Png, RoundTripAllChannelCounts) {
    std::mt19937_64 rng(3);
    RgbImage rgb(13, 9);
    for (auto& v : rgb.data()) v = static_cast<std::uint8_t>(rng());
    EXPECT_EQ(decode_png<RgbImage>(encode_png(rgb)), rgb);

    GrayImage gray(6, 11);
    for (auto& v : gray.data()) v = static_cast<std::uint8_t>(rng());
    EXPECT_EQ(decode_png<GrayImage>(encode_png(gray)), gray);

    BinaryImage bin(8, 8, 0);
    bin.at(3, 4) = 255;
    EXPECT_EQ(decode_png<BinaryImage>(encode_png(bin)), bin);
}

TEST(Png, EncodingIsDeterministic) {
    RgbImage img(32, 32, 90);
    img.set_pixel(4, 5, Rgb{1, 2, 3});
    EXPECT_EQ(encode_png(img), encode_png(img));
}

TEST(Png, GrayDecodesAsRgb) {
    GrayImage g(2, 2, 40);
    const auto rgb = decode_png<RgbImage>(encode_png(g));
    EXPECT_EQ(rgb.pixel(1, 1), (Rgb{40, 40, 40}));
}

TEST(Png, GarbageIsAnIoError) {
    EXPECT_THROW(decode_png<RgbImage>(std::vector<std::uint8_t>{1, 2, 3, 4}), IoError);
    EXPECT_THROW(read_png<RgbImage>("/nonexistent/x.png"), IoError);
}

TEST(Base64, KnownVectors) {
    const auto enc = [](const std::string& s) { return base64::encode({s.begin(), s.end()}); };
    EXPECT_EQ(enc(""), "");
    EXPECT_EQ(enc("f"), "Zg==");
    EXPECT_EQ(enc("fo"), "Zm8=");
    EXPECT_EQ(enc("foo"), "Zm9v");
    EXPECT_EQ(enc("foob"), "Zm9vYg==");
    EXPECT_EQ(enc("foobar"), "Zm9vYmFy");
}

TEST(Base64, RoundTripAndErrors) {
    std::mt19937_64 rng(4);
    for (int n = 0; n < 40; ++n) {
        std::vector<std::uint8_t> bytes(static_cast<std::size_t>(n));
        for (auto& b : bytes) b = static_cast<std::uint8_t>(rng());
        EXPECT_EQ(base64::decode(base64::encode(bytes)), bytes);
    }
    EXPECT_THROW(base64::decode("Zm9"), base64::DecodeError);
    EXPECT_THROW(base64::decode("Zm9*"), base64::DecodeError);
}
