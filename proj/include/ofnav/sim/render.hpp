#pragma once

// Column-wise pinhole renderer. For every image column the panels hit by the
// column's ground ray are sorted near to far; a pixel takes the first panel
// whose vertical extent covers it, otherwise the floor (below the horizon) or
// the backdrop (above it).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "ofnav/error.hpp"
#include "ofnav/image.hpp"
#include "ofnav/sim/scene.hpp"
#include "ofnav/sim/texture.hpp"

namespace ofnav::sim {

inline constexpr int kSurfaceFloor = -1;
inline constexpr int kSurfaceBackdrop = -2;

struct RenderResult {
    GrayImage image;
    std::vector<int> surface;  // per pixel: obstacle index, kSurfaceFloor or kSurfaceBackdrop
};

inline RenderResult render_with_ids(const Scene& scene, const RobotPose& pose, const CameraModel& cam = {},
                                    std::uint64_t noise_seed = 0) {
    cam.validate();
    if (!std::isfinite(pose.x) || !std::isfinite(pose.y) || !std::isfinite(pose.heading) ||
        !scene.arena.contains(pose.x, pose.y)) {
        fail(ErrorKind::InvalidArgument, "render: pose outside arena bounds");
    }
    const int w = cam.width, h = cam.height;
    const double f = cam.focal_px();
    const double ch = cam.mount_height;
    const Point2 o = cam.position(pose);

    RenderResult out{GrayImage(w, h), std::vector<int>(static_cast<std::size_t>(w) * h, kSurfaceBackdrop)};

    struct ColumnHit {
        double z;  // depth along the optical axis
        double s;
        std::size_t idx;
    };
    std::vector<ColumnHit> hits;
    hits.reserve(scene.obstacles.size());

    for (int u = 0; u < w; ++u) {
        const double xc = (u + 0.5) - 0.5 * w;  // positive to the right
        const double alpha = std::atan(xc / f);
        const double cos_a = std::cos(alpha);
        const double bearing = pose.heading - alpha;
        const Point2 d{std::cos(bearing), std::sin(bearing)};

        hits.clear();
        for (std::size_t i = 0; i < scene.obstacles.size(); ++i) {
            const auto& ob = scene.obstacles[i];
            if (auto hit = ray_segment(o, d, ob.a(), ob.b())) hits.push_back({hit->t * cos_a, hit->s, i});
        }
        std::sort(hits.begin(), hits.end(), [](const ColumnHit& l, const ColumnHit& r) {
            return l.z < r.z || (l.z == r.z && l.idx < r.idx);
        });

        for (int v = 0; v < h; ++v) {
            const double yc = (v + 0.5) - 0.5 * h;  // positive downward
            const auto pix = static_cast<std::size_t>(v) * w + u;
            double value = 0.0;
            int id = kSurfaceBackdrop;
            for (const auto& hit : hits) {
                const auto& ob = scene.obstacles[hit.idx];
                const double elev = ch - yc * hit.z / f;  // height on the panel plane
                if (elev >= 0.0 && elev <= ob.height) {
                    const double fp = hit.z / (f * cos_a);
                    value = obstacle_texture(hit.s, elev, ob.seed, fp);
                    id = static_cast<int>(hit.idx);
                    break;
                }
            }
            if (id == kSurfaceBackdrop) {
                if (yc > 0.0) {
                    const double zf = f * ch / yc;
                    const double t = zf / cos_a;
                    const double fp = std::max(zf / f, zf * zf / (f * ch));
                    value = floor_texture(o.x + t * d.x, o.y + t * d.y, scene.floor_seed, fp);
                    id = kSurfaceFloor;
                } else {
                    value = backdrop_texture(bearing, std::atan(-yc / f), scene.backdrop_seed, 1.0 / f);
                }
            }
            if (cam.noise_sigma > 0.0) {
                const double u1 = std::max(unit_hash(static_cast<std::int64_t>(pix), 0, noise_seed), 1e-300);
                const double u2 = unit_hash(static_cast<std::int64_t>(pix), 1, noise_seed);
                value += cam.noise_sigma * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
            }
            out.image.at(u, v) = value;
            out.surface[pix] = id;
        }
    }
    return out;
}

inline GrayImage render(const Scene& scene, const RobotPose& pose, const CameraModel& cam = {},
                        std::uint64_t noise_seed = 0) {
    return render_with_ids(scene, pose, cam, noise_seed).image;
}

}  // namespace ofnav::sim
