#pragma once

// Sample-point layout for sparse flow: one centre point plus concentric rings
// whose radii shrink geometrically towards the centre (outer ring radius 1).

#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "ofnav/error.hpp"

namespace ofnav {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
    bool operator==(const Point2&) const = default;
};

/// Points in normalised unit-disc coordinates. Order: centre, then rings
/// inner to outer, each ring counter-clockwise starting at angle 0.
struct PointDistribution {
    std::vector<Point2> points;

    std::size_t size() const noexcept { return points.size(); }
    bool operator==(const PointDistribution&) const = default;
};

struct RingParams {
    int rings = 5;
    int per_ring = 20;
    double growth = 2.0;
};

inline PointDistribution make_ring_distribution(int rings, int per_ring, double growth) {
    require(rings >= 0, "ring distribution: rings must be >= 0");
    require(per_ring >= 1, "ring distribution: per_ring must be >= 1");
    require(growth > 1.0, "ring distribution: growth must be > 1");
    PointDistribution d;
    d.points.reserve(1 + static_cast<std::size_t>(rings) * per_ring);
    d.points.push_back({0.0, 0.0});
    for (int k = 1; k <= rings; ++k) {
        const double radius = std::pow(growth, static_cast<double>(k - rings));
        for (int j = 0; j < per_ring; ++j) {
            const double a = 2.0 * std::numbers::pi * j / per_ring;
            d.points.push_back({radius * std::cos(a), radius * std::sin(a)});
        }
    }
    return d;
}

inline PointDistribution make_ring_distribution(const RingParams& p) {
    return make_ring_distribution(p.rings, p.per_ring, p.growth);
}

/// Maps the unit disc onto the image so its diameter is occupancy*min(w,h),
/// centred at (w/2, h/2). Image y grows downward, so normalised +y maps to
/// smaller row indices (counter-clockwise stays counter-clockwise on screen).
inline std::vector<Point2> project_distribution(const PointDistribution& dist, int width, int height,
                                                double occupancy = 0.8) {
    require(occupancy > 0.0 && occupancy <= 1.0, "project_distribution: occupancy must be in (0,1]");
    require(width >= 1 && height >= 1, "project_distribution: bad image size");
    const double cx = width / 2.0;
    const double cy = height / 2.0;
    const double r = occupancy * std::min(width, height) / 2.0;
    std::vector<Point2> out;
    out.reserve(dist.size());
    for (const auto& p : dist.points) out.push_back({cx + r * p.x, cy - r * p.y});
    return out;
}

// Plain-text table, one "x y" pair per line.

inline void write_distribution(std::ostream& out, const PointDistribution& d) {
    out << std::setprecision(17);
    for (const auto& p : d.points) out << p.x << ' ' << p.y << '\n';
}

inline PointDistribution read_distribution(std::istream& in) {
    PointDistribution d;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream ls(line);
        Point2 p;
        std::string extra;
        if (!(ls >> p.x >> p.y) || (ls >> extra)) {
            fail(ErrorKind::DataFormat, "distribution: malformed line " + std::to_string(lineno));
        }
        if (std::hypot(p.x, p.y) > 1.0 + 1e-9) {
            fail(ErrorKind::DataFormat, "distribution: point outside unit disc at line " + std::to_string(lineno));
        }
        d.points.push_back(p);
    }
    return d;
}

inline void save_distribution(const std::string& path, const PointDistribution& d) {
    std::ofstream out(path);
    if (!out) fail(ErrorKind::DataFormat, "cannot write " + path);
    write_distribution(out, d);
}

inline PointDistribution load_distribution(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::DataFormat, "cannot open " + path);
    return read_distribution(in);
}

}  // namespace ofnav
