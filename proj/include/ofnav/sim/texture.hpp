#pragma once

// Procedural, band-limited textures. Every octave is faded out as its wavelength
// approaches the sampling footprint, so rendered frames stay free of aliasing
// flicker that would otherwise show up as spurious flow.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace ofnav::sim {

inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline std::uint64_t hash3(std::int64_t a, std::int64_t b, std::uint64_t seed) {
    return mix64(seed * 0xd6e8feb86659fd93ull ^ static_cast<std::uint64_t>(a) * 0x9e3779b97f4a7c15ull ^
                 static_cast<std::uint64_t>(b) * 0xc2b2ae3d27d4eb4full);
}

/// Uniform in [0, 1).
inline double unit_hash(std::int64_t a, std::int64_t b, std::uint64_t seed) {
    return static_cast<double>(hash3(a, b, seed) >> 11) * 0x1.0p-53;
}

inline double smoothstep(double e0, double e1, double x) {
    const double t = std::clamp((x - e0) / (e1 - e0), 0.0, 1.0);
    return t * t * (3.0 - 2.0 * t);
}

/// Lattice value noise in [-1, 1] with quintic interpolation; unit lattice spacing.
inline double value_noise(double x, double y, std::uint64_t seed) {
    const double fx = std::floor(x), fy = std::floor(y);
    const auto ix = static_cast<std::int64_t>(fx), iy = static_cast<std::int64_t>(fy);
    const double tx = x - fx, ty = y - fy;
    const double sx = tx * tx * tx * (tx * (tx * 6.0 - 15.0) + 10.0);
    const double sy = ty * ty * ty * (ty * (ty * 6.0 - 15.0) + 10.0);
    auto v = [&](std::int64_t a, std::int64_t b) { return 2.0 * unit_hash(a, b, seed) - 1.0; };
    const double a = v(ix, iy) + sx * (v(ix + 1, iy) - v(ix, iy));
    const double b = v(ix, iy + 1) + sx * (v(ix + 1, iy + 1) - v(ix, iy + 1));
    return a + sy * (b - a);
}

/// Octave weight: 1 when the wavelength spans >= 4 footprints, 0 at <= 1.5.
inline double octave_fade(double wavelength, double footprint) {
    return smoothstep(1.5, 4.0, wavelength / std::max(footprint, 1e-12));
}

/// Box-filtered checkerboard in [-1, 1]; `cell` is the square size, `footprint` the filter width.
inline double filtered_checker(double x, double y, double cell, double footprint) {
    const double w = std::max(footprint / cell, 1e-6);
    auto tri = [](double p) {
        const double f = p / 2.0 - std::floor(p / 2.0);
        return std::abs(f - 0.5);
    };
    auto box = [&](double p) { return 2.0 * (tri(p - 0.5 * w) - tri(p + 0.5 * w)) / w; };
    const double ix = std::clamp(box(x / cell), -1.0, 1.0);
    const double iy = std::clamp(box(y / cell), -1.0, 1.0);
    return ix * iy;
}

struct Octave {
    double wavelength;  // world units
    double amplitude;   // grey levels
};

/// Sum of faded value-noise octaves around `base`.
template <std::size_t N>
double fractal(double x, double y, std::uint64_t seed, double base, const std::array<Octave, N>& oct, double footprint) {
    double v = base;
    for (std::size_t k = 0; k < N; ++k) {
        const double fade = octave_fade(oct[k].wavelength, footprint);
        if (fade <= 0.0) continue;
        v += fade * oct[k].amplitude *
             value_noise(x / oct[k].wavelength + 17.0 * static_cast<double>(k), y / oct[k].wavelength,
                         seed + 0x51ed27ull * (k + 1));
    }
    return v;
}

/// High-contrast obstacle surface; (s, h) in metres along the panel and above the floor.
inline double obstacle_texture(double s, double h, std::uint64_t seed, double footprint) {
    static constexpr std::array<Octave, 4> oct{{{0.12, 55.0}, {0.06, 45.0}, {0.03, 35.0}, {0.015, 25.0}}};
    double v = fractal(s, h, seed, 128.0, oct, footprint);
    const double cell = 0.03 + 0.03 * unit_hash(1, 2, seed);
    v += 30.0 * octave_fade(2.0 * cell, footprint) * filtered_checker(s, h, cell, footprint);
    return std::clamp(v, 0.0, 255.0);
}

/// Floor; (x, y) world metres.
inline double floor_texture(double x, double y, std::uint64_t seed, double footprint) {
    static constexpr std::array<Octave, 5> oct{{{0.4, 22.0}, {0.2, 20.0}, {0.1, 18.0}, {0.05, 16.0}, {0.025, 12.0}}};
    return std::clamp(fractal(x, y, seed, 100.0, oct, footprint), 0.0, 255.0);
}

/// Distant backdrop as a function of bearing and elevation (rad); periodic in bearing.
inline double backdrop_texture(double bearing, double elevation, std::uint64_t seed, double footprint_rad) {
    double v = 160.0;
    for (int k = 0; k < 10; ++k) {
        const double n = 6.0 + std::floor(60.0 * unit_hash(k, 0, seed));
        const double m = -30.0 + 60.0 * unit_hash(k, 1, seed);
        const double phase = 2.0 * std::numbers::pi * unit_hash(k, 2, seed);
        const double wavelength = 2.0 * std::numbers::pi / std::hypot(n, m);
        v += 12.0 * octave_fade(wavelength, footprint_rad) * std::cos(n * bearing + m * elevation + phase);
    }
    return std::clamp(v, 0.0, 255.0);
}

}  // namespace ofnav::sim
