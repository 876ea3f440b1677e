#pragma once

#include <cstdint>
#include <random>

#include <gtest/gtest.h>

#include "ofnav/error.hpp"
#include "ofnav/image.hpp"

namespace ofnav::fixtures {

/// Smoothed uniform noise on a (w + 2m) x (h + 2m) canvas.
inline GrayImage noise_canvas(int w, int h, int margin, std::uint64_t seed, int blur_passes = 2) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 255.0);
    GrayImage img(w + 2 * margin, h + 2 * margin);
    for (auto& v : img.data()) v = u(rng);
    for (int k = 0; k < blur_passes; ++k) img = gaussian3x3(img);
    return img;
}

/// w x h window of `canvas` whose top-left corner is (margin - dx, margin - dy):
/// content moves by (+dx, +dy) relative to the window at offset (margin, margin).
inline GrayImage crop_shifted(const GrayImage& canvas, int w, int h, int margin, int dx, int dy) {
    GrayImage out(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) out.at(x, y) = canvas.at(x + margin - dx, y + margin - dy);
    return out;
}

}  // namespace ofnav::fixtures

#define EXPECT_OFNAV_ERROR(stmt, expected_kind)                                        \
    do {                                                                               \
        bool thrown_ = false;                                                          \
        try {                                                                          \
            stmt;                                                                      \
        } catch (const ::ofnav::Error& e_) {                                           \
            thrown_ = true;                                                            \
            EXPECT_EQ(static_cast<int>(e_.kind()), static_cast<int>(expected_kind))    \
                << "message: " << e_.what();                                           \
        }                                                                              \
        EXPECT_TRUE(thrown_) << "expected ofnav::Error from " #stmt;                   \
    } while (0)
