#pragma once

// Raster types and the preprocessing filters applied before flow estimation.
// Every filter is pure: it returns a fresh image and leaves its input alone.
// Convolutions replicate the nearest edge pixel outside the image.

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "ofnav/error.hpp"

namespace ofnav {

/// Single-channel floating point raster, row-major, nominal range [0,255].
/// Filter outputs (e.g. the Laplacian) may leave that range and are kept signed.
class GrayImage {
public:
    GrayImage(int width, int height, double fill = 0.0) : width_(width), height_(height) {
        require(width >= 1 && height >= 1, "GrayImage: dimensions must be >= 1");
        data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
    }

    GrayImage(int width, int height, std::vector<double> data)
        : width_(width), height_(height), data_(std::move(data)) {
        require(width >= 1 && height >= 1, "GrayImage: dimensions must be >= 1");
        require(data_.size() == static_cast<std::size_t>(width) * static_cast<std::size_t>(height),
                "GrayImage: data length must equal width*height");
    }

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t size() const noexcept { return data_.size(); }

    double& at(int x, int y) { return data_[index(x, y)]; }
    double at(int x, int y) const { return data_[index(x, y)]; }

    /// Read with replicate-border semantics.
    double clamped(int x, int y) const {
        x = std::clamp(x, 0, width_ - 1);
        y = std::clamp(y, 0, height_ - 1);
        return data_[index(x, y)];
    }

    const std::vector<double>& data() const noexcept { return data_; }
    std::vector<double>& data() noexcept { return data_; }

    bool operator==(const GrayImage&) const = default;

private:
    std::size_t index(int x, int y) const {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
    }

    int width_;
    int height_;
    std::vector<double> data_;
};

struct Rgb {
    std::uint8_t r = 0, g = 0, b = 0;
    bool operator==(const Rgb&) const = default;
};

/// 8-bit RGB raster, row-major.
class ColorImage {
public:
    ColorImage(int width, int height, Rgb fill = {}) : width_(width), height_(height) {
        require(width >= 1 && height >= 1, "ColorImage: dimensions must be >= 1");
        data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
    }

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }

    Rgb& at(int x, int y) { return data_[static_cast<std::size_t>(y) * width_ + x]; }
    const Rgb& at(int x, int y) const { return data_[static_cast<std::size_t>(y) * width_ + x]; }

    const std::vector<Rgb>& pixels() const noexcept { return data_; }

    bool operator==(const ColorImage&) const = default;

private:
    int width_;
    int height_;
    std::vector<Rgb> data_;
};

/// BT.601 luma.
inline GrayImage to_grayscale(const ColorImage& img) {
    GrayImage out(img.width(), img.height());
    auto& dst = out.data();
    const auto& src = img.pixels();
    for (std::size_t i = 0; i < src.size(); ++i) {
        dst[i] = 0.299 * src[i].r + 0.587 * src[i].g + 0.114 * src[i].b;
    }
    return out;
}

/// 3x3 kernel convolution with replicated borders. Kernel is row-major.
inline GrayImage convolve3x3(const GrayImage& img, const std::array<double, 9>& k) {
    const int w = img.width();
    const int h = img.height();
    GrayImage out(w, h);
    for (int y = 0; y < h; ++y) {
        const int ym = std::max(y - 1, 0);
        const int yp = std::min(y + 1, h - 1);
        for (int x = 0; x < w; ++x) {
            const int xm = std::max(x - 1, 0);
            const int xp = std::min(x + 1, w - 1);
            out.at(x, y) = k[0] * img.at(xm, ym) + k[1] * img.at(x, ym) + k[2] * img.at(xp, ym) +
                           k[3] * img.at(xm, y) + k[4] * img.at(x, y) + k[5] * img.at(xp, y) +
                           k[6] * img.at(xm, yp) + k[7] * img.at(x, yp) + k[8] * img.at(xp, yp);
        }
    }
    return out;
}

/// Binomial 3x3 smoothing, (1,2,1;2,4,2;1,2,1)/16.
inline GrayImage gaussian3x3(const GrayImage& img) {
    static constexpr std::array<double, 9> kernel{1.0 / 16, 2.0 / 16, 1.0 / 16,
                                                  2.0 / 16, 4.0 / 16, 2.0 / 16,
                                                  1.0 / 16, 2.0 / 16, 1.0 / 16};
    return convolve3x3(img, kernel);
}

/// 4-neighbour Laplacian. Output is signed and not clamped.
inline GrayImage laplacian(const GrayImage& img) {
    static constexpr std::array<double, 9> kernel{0, 1, 0, 1, -4, 1, 0, 1, 0};
    return convolve3x3(img, kernel);
}

/// Smooth then keep every second pixel; output is ceil(w/2) x ceil(h/2).
inline GrayImage downsample2x(const GrayImage& img) {
    require(img.width() >= 2 && img.height() >= 2, "downsample2x: image must be at least 2x2");
    const GrayImage smooth = gaussian3x3(img);
    const int w = (img.width() + 1) / 2;
    const int h = (img.height() + 1) / 2;
    GrayImage out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) out.at(x, y) = smooth.at(2 * x, 2 * y);
    }
    return out;
}

/// Grayscale -> Gaussian -> Laplacian, the conditioning applied to every frame before tracking.
inline GrayImage preprocess_for_flow(const GrayImage& img) { return laplacian(gaussian3x3(img)); }

/// Float to 8-bit: clamp to [0,255], round half up.
inline std::uint8_t to_u8(double v) {
    if (!(v > 0.0)) return 0;  // also maps NaN to 0
    if (v >= 255.0) return 255;
    return static_cast<std::uint8_t>(static_cast<int>(v + 0.5));
}

}  // namespace ofnav
