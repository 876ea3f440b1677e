#include <gtest/gtest.h>

#include "helpers.hpp"
#include "ofnav/image.hpp"

using namespace ofnav;

namespace {

GrayImage impulse(int w, int h, int cx, int cy, double v) {
    GrayImage img(w, h);
    img.at(cx, cy) = v;
    return img;
}

// Direct 3x3 convolution over an explicitly padded copy, independent of the library convolution.
GrayImage reference_convolve(const GrayImage& img, const double k[3][3]) {
    const int w = img.width(), h = img.height();
    std::vector<double> pad(static_cast<std::size_t>(w + 2) * (h + 2));
    auto p = [&](int x, int y) -> double& { return pad[static_cast<std::size_t>(y) * (w + 2) + x]; };
    for (int y = -1; y <= h; ++y)
        for (int x = -1; x <= w; ++x) p(x + 1, y + 1) = img.at(std::min(std::max(x, 0), w - 1), std::min(std::max(y, 0), h - 1));
    GrayImage out(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double s = 0;
            for (int j = 0; j < 3; ++j)
                for (int i = 0; i < 3; ++i) s += k[j][i] * p(x + i, y + j);
            out.at(x, y) = s;
        }
    return out;
}

}  // namespace

TEST(GrayImage, RejectsBadDimensions) {
    EXPECT_OFNAV_ERROR(GrayImage(0, 3), ErrorKind::InvalidArgument);
    EXPECT_OFNAV_ERROR(GrayImage(2, 2, std::vector<double>(3)), ErrorKind::InvalidArgument);
}

TEST(Grayscale, Bt601Luma) {
    ColorImage c(3, 1);
    c.at(0, 0) = {255, 255, 255};
    c.at(1, 0) = {0, 0, 0};
    c.at(2, 0) = {255, 0, 0};
    const auto g = to_grayscale(c);
    EXPECT_NEAR(g.at(0, 0), 255.0, 1e-9);
    EXPECT_DOUBLE_EQ(g.at(1, 0), 0.0);
    EXPECT_NEAR(g.at(2, 0), 0.299 * 255.0, 1e-12);
    EXPECT_NEAR(g.at(2, 0), 76.245, 1e-9);
}

TEST(Gaussian, ConstantImageUnchanged) {
    const auto out = gaussian3x3(GrayImage(9, 7, 7.0));
    for (double v : out.data()) EXPECT_DOUBLE_EQ(v, 7.0);
}

TEST(Gaussian, ImpulseGivesBinomialPatch) {
    const auto out = gaussian3x3(impulse(7, 7, 3, 3, 16.0));
    const double expect[3][3] = {{1, 2, 1}, {2, 4, 2}, {1, 2, 1}};
    for (int y = 0; y < 7; ++y)
        for (int x = 0; x < 7; ++x) {
            const bool inside = std::abs(x - 3) <= 1 && std::abs(y - 3) <= 1;
            EXPECT_DOUBLE_EQ(out.at(x, y), inside ? expect[y - 2][x - 2] : 0.0) << x << "," << y;
        }
}

TEST(Gaussian, SinglePixelImage) {
    EXPECT_DOUBLE_EQ(gaussian3x3(GrayImage(1, 1, 42.0)).at(0, 0), 42.0);
}

TEST(Gaussian, MatchesPaddedReference) {
    const auto img = fixtures::noise_canvas(11, 8, 0, 3, 0);
    const double k[3][3] = {{1 / 16.0, 2 / 16.0, 1 / 16.0}, {2 / 16.0, 4 / 16.0, 2 / 16.0}, {1 / 16.0, 2 / 16.0, 1 / 16.0}};
    const auto a = gaussian3x3(img);
    const auto b = reference_convolve(img, k);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a.data()[i], b.data()[i], 1e-12);
}

TEST(Laplacian, ConstantImageIsZero) {
    const auto out = laplacian(GrayImage(6, 5, 123.0));
    for (double v : out.data()) EXPECT_DOUBLE_EQ(v, 0.0);
}

TEST(Laplacian, ImpulseResponse) {
    const auto out = laplacian(impulse(5, 5, 2, 2, 1.0));
    EXPECT_DOUBLE_EQ(out.at(2, 2), -4.0);
    EXPECT_DOUBLE_EQ(out.at(1, 2), 1.0);
    EXPECT_DOUBLE_EQ(out.at(3, 2), 1.0);
    EXPECT_DOUBLE_EQ(out.at(2, 1), 1.0);
    EXPECT_DOUBLE_EQ(out.at(2, 3), 1.0);
    EXPECT_DOUBLE_EQ(out.at(1, 1), 0.0);
    EXPECT_DOUBLE_EQ(out.at(0, 0), 0.0);
}

TEST(Laplacian, RampIsZeroInside) {
    GrayImage ramp(10, 6);
    for (int y = 0; y < 6; ++y)
        for (int x = 0; x < 10; ++x) ramp.at(x, y) = x;
    const auto out = laplacian(ramp);
    for (int y = 0; y < 6; ++y)
        for (int x = 1; x < 9; ++x) EXPECT_DOUBLE_EQ(out.at(x, y), 0.0);
}

TEST(Laplacian, KeepsNegativeValues) {
    const auto out = laplacian(impulse(3, 3, 1, 1, 255.0));
    EXPECT_DOUBLE_EQ(out.at(1, 1), -1020.0);
}

TEST(Downsample, Dimensions) {
    EXPECT_EQ(downsample2x(GrayImage(320, 240)).width(), 160);
    EXPECT_EQ(downsample2x(GrayImage(320, 240)).height(), 120);
    const auto odd = downsample2x(GrayImage(5, 3));
    EXPECT_EQ(odd.width(), 3);
    EXPECT_EQ(odd.height(), 2);
}

TEST(Downsample, ConstantStaysConstant) {
    const auto out = downsample2x(GrayImage(8, 6, 9.5));
    for (double v : out.data()) EXPECT_DOUBLE_EQ(v, 9.5);
}

TEST(Downsample, SamplesSmoothedEvenSites) {
    const auto img = fixtures::noise_canvas(9, 7, 0, 11, 0);
    const auto smooth = gaussian3x3(img);
    const auto out = downsample2x(img);
    for (int y = 0; y < out.height(); ++y)
        for (int x = 0; x < out.width(); ++x) EXPECT_DOUBLE_EQ(out.at(x, y), smooth.at(2 * x, 2 * y));
}

TEST(Downsample, CheckerboardInteriorIsMidGrey) {
    GrayImage cb(6, 6);
    for (int y = 0; y < 6; ++y)
        for (int x = 0; x < 6; ++x) cb.at(x, y) = ((x + y) % 2) ? 255.0 : 0.0;
    // even site of a 0-pixel: 4/16 * 0 + 4 * 2/16 * 255 + 4 * 1/16 * 0
    EXPECT_DOUBLE_EQ(downsample2x(cb).at(1, 1), 127.5);
}

TEST(Downsample, RejectsTinyImages) {
    EXPECT_OFNAV_ERROR(downsample2x(GrayImage(1, 5)), ErrorKind::InvalidArgument);
    EXPECT_OFNAV_ERROR(downsample2x(GrayImage(5, 1)), ErrorKind::InvalidArgument);
}

TEST(Filters, AreLinear) {
    const auto a = fixtures::noise_canvas(13, 9, 0, 1, 0);
    const auto b = fixtures::noise_canvas(13, 9, 0, 2, 0);
    const double ca = 0.7, cb = -2.3;
    GrayImage mix(13, 9);
    for (std::size_t i = 0; i < mix.size(); ++i) mix.data()[i] = ca * a.data()[i] + cb * b.data()[i];
    for (auto f : {&gaussian3x3, &laplacian}) {
        const auto fm = f(mix), fa = f(a), fb = f(b);
        for (std::size_t i = 0; i < mix.size(); ++i) EXPECT_NEAR(fm.data()[i], ca * fa.data()[i] + cb * fb.data()[i], 1e-9);
    }
}

TEST(Filters, LeaveInputUntouched) {
    const auto img = fixtures::noise_canvas(10, 10, 0, 5, 0);
    const auto copy = img;
    (void)gaussian3x3(img);
    (void)laplacian(img);
    (void)downsample2x(img);
    (void)preprocess_for_flow(img);
    EXPECT_EQ(img, copy);
}

TEST(ToU8, ClampsAndRoundsHalfUp) {
    EXPECT_EQ(to_u8(-3.0), 0);
    EXPECT_EQ(to_u8(300.0), 255);
    EXPECT_EQ(to_u8(0.5), 1);
    EXPECT_EQ(to_u8(1.49), 1);
    EXPECT_EQ(to_u8(254.5), 255);
    EXPECT_EQ(to_u8(std::nan("")), 0);
}
