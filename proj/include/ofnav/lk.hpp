#pragma once

// Sparse pyramidal Lucas-Kanade tracking.
//
// At each pyramid level (coarse to fine) the displacement of a point is refined
// by Gauss-Newton steps on the windowed brightness mismatch:
//
//   G = sum_w [Ix^2  IxIy; IxIy  Iy^2]     (spatial gradient matrix of prev)
//   b = sum_w (I(x) - J(x + g + v)) [Ix; Iy]
//   v += G^-1 b   until |G^-1 b| < eps or max_iter steps
//
// and the level result is doubled to seed the next finer level.

#include <cmath>
#include <cstdint>
#include <vector>

#include "ofnav/distribution.hpp"
#include "ofnav/error.hpp"
#include "ofnav/image.hpp"

namespace ofnav {

struct LkParams {
    int window = 31;       // odd, >= 3
    int max_iter = 10;
    double eps = 0.03;     // px, stop when the update is shorter
    int levels = 3;        // total pyramid layers including full resolution
    double min_eig = 1e-4; // lost when lambda_min(G) < min_eig * window^2

    void validate() const {
        require(window >= 3 && window % 2 == 1, "LkParams: window must be odd and >= 3");
        require(levels >= 1, "LkParams: levels must be >= 1");
        require(eps > 0.0, "LkParams: eps must be > 0");
        require(max_iter >= 0, "LkParams: max_iter must be >= 0");
        require(min_eig >= 0.0, "LkParams: min_eig must be >= 0");
    }
};

enum class TrackStatus : std::uint8_t { Tracked, Lost };

/// Per-point displacement from prev to next. Lost points carry u = (0,0).
struct FlowField {
    std::vector<Point2> points;
    std::vector<Point2> u;
    std::vector<TrackStatus> status;

    std::size_t size() const noexcept { return points.size(); }
    bool tracked(std::size_t i) const { return status[i] == TrackStatus::Tracked; }
    bool operator==(const FlowField&) const = default;
};

namespace detail {

struct Gradients {
    GrayImage ix;
    GrayImage iy;
};

// Central differences with replicated borders.
inline Gradients central_gradients(const GrayImage& img) {
    const int w = img.width();
    const int h = img.height();
    Gradients g{GrayImage(w, h), GrayImage(w, h)};
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            g.ix.at(x, y) = 0.5 * (img.clamped(x + 1, y) - img.clamped(x - 1, y));
            g.iy.at(x, y) = 0.5 * (img.clamped(x, y + 1) - img.clamped(x, y - 1));
        }
    }
    return g;
}

// Samples a (2r+1)^2 window centred at a fractional position. All taps share the
// same fractional offset, so the bilinear weights are computed once.
class WindowSampler {
public:
    WindowSampler(double cx, double cy, int radius) : radius_(radius) {
        const double fx = std::floor(cx);
        const double fy = std::floor(cy);
        x0_ = static_cast<int>(fx) - radius;
        y0_ = static_cast<int>(fy) - radius;
        const double ax = cx - fx;
        const double ay = cy - fy;
        w00_ = (1 - ax) * (1 - ay);
        w10_ = ax * (1 - ay);
        w01_ = (1 - ax) * ay;
        w11_ = ax * ay;
    }

    void sample(const GrayImage& img, std::vector<double>& out) const {
        const int n = 2 * radius_ + 1;
        out.resize(static_cast<std::size_t>(n) * n);
        const int w = img.width();
        const int h = img.height();
        const bool interior = x0_ >= 0 && y0_ >= 0 && x0_ + n < w && y0_ + n < h;
        std::size_t k = 0;
        for (int j = 0; j < n; ++j) {
            const int y = y0_ + j;
            for (int i = 0; i < n; ++i, ++k) {
                const int x = x0_ + i;
                if (interior) {
                    out[k] = w00_ * img.at(x, y) + w10_ * img.at(x + 1, y) + w01_ * img.at(x, y + 1) +
                             w11_ * img.at(x + 1, y + 1);
                } else {
                    out[k] = w00_ * img.clamped(x, y) + w10_ * img.clamped(x + 1, y) +
                             w01_ * img.clamped(x, y + 1) + w11_ * img.clamped(x + 1, y + 1);
                }
            }
        }
    }

    /// 1 where all four bilinear taps lie inside a w x h image, else 0.
    void inside(int w, int h, std::vector<double>& mask) const {
        const int n = 2 * radius_ + 1;
        mask.resize(static_cast<std::size_t>(n) * n);
        std::size_t k = 0;
        for (int j = 0; j < n; ++j) {
            const int y = y0_ + j;
            for (int i = 0; i < n; ++i, ++k) {
                const int x = x0_ + i;
                mask[k] = x >= 0 && y >= 0 && x + 1 < w && y + 1 < h ? 1.0 : 0.0;
            }
        }
    }

private:
    int radius_;
    int x0_ = 0, y0_ = 0;
    double w00_ = 0, w10_ = 0, w01_ = 0, w11_ = 0;
};

inline bool window_inside(double x, double y, int radius, int width, int height) {
    return x - radius >= 0.0 && y - radius >= 0.0 && x + radius <= width - 1.0 && y + radius <= height - 1.0;
}

}  // namespace detail

/// Image pyramid, level 0 is full resolution.
inline std::vector<GrayImage> build_pyramid(const GrayImage& base, int levels) {
    std::vector<GrayImage> pyr;
    pyr.reserve(static_cast<std::size_t>(levels));
    pyr.push_back(base);
    for (int l = 1; l < levels; ++l) {
        const auto& prev = pyr.back();
        if (prev.width() < 2 || prev.height() < 2) break;
        pyr.push_back(downsample2x(prev));
    }
    return pyr;
}

/// Tracks `points` from `prev` to `next`.
///
/// Window taps that fall outside a level (in prev or in next) are left out of the
/// sums, so coarse levels near the border are not pulled toward zero motion. A point is
/// reported lost when the gradient matrix is ill-conditioned at any level, when
/// its full-resolution window (in prev, or at the tracked position in next)
/// does not fit inside the image, or when the estimate is not finite.
inline FlowField lk_track(const GrayImage& prev, const GrayImage& next, const std::vector<Point2>& points,
                          const LkParams& params = {}) {
    params.validate();
    if (prev.width() != next.width() || prev.height() != next.height()) {
        fail(ErrorKind::InvalidArgument, "lk_track: prev and next dimensions differ");
    }
    FlowField flow;
    flow.points = points;
    flow.u.assign(points.size(), Point2{});
    flow.status.assign(points.size(), TrackStatus::Lost);
    if (points.empty()) return flow;

    const auto prev_pyr = build_pyramid(prev, params.levels);
    const auto next_pyr = build_pyramid(next, params.levels);
    const int levels = static_cast<int>(prev_pyr.size());
    std::vector<detail::Gradients> grads;
    grads.reserve(prev_pyr.size());
    for (const auto& img : prev_pyr) grads.push_back(detail::central_gradients(img));

    const int radius = params.window / 2;
    const double area = static_cast<double>(params.window) * params.window;
    const double eig_threshold = params.min_eig * area;

    std::vector<double> pi, pix, piy, pj, mi, mj;

    for (std::size_t k = 0; k < points.size(); ++k) {
        const Point2 p = points[k];
        if (!detail::window_inside(p.x, p.y, radius, prev.width(), prev.height())) continue;

        double gx = 0.0, gy = 0.0;  // guess carried between levels
        bool ok = true;
        for (int level = levels - 1; level >= 0 && ok; --level) {
            const double scale = std::ldexp(1.0, -level);
            const double px = p.x * scale;
            const double py = p.y * scale;
            const GrayImage& img_i = prev_pyr[static_cast<std::size_t>(level)];
            const GrayImage& img_j = next_pyr[static_cast<std::size_t>(level)];
            const auto& gr = grads[static_cast<std::size_t>(level)];

            const detail::WindowSampler at_prev(px, py, radius);
            at_prev.sample(img_i, pi);
            at_prev.sample(gr.ix, pix);
            at_prev.sample(gr.iy, piy);
            at_prev.inside(img_i.width(), img_i.height(), mi);
            for (std::size_t t = 0; t < pi.size(); ++t) {
                pix[t] *= mi[t];
                piy[t] *= mi[t];
            }

            double gxx = 0, gxy = 0, gyy = 0;
            for (std::size_t t = 0; t < pi.size(); ++t) {
                gxx += pix[t] * pix[t];
                gxy += pix[t] * piy[t];
                gyy += piy[t] * piy[t];
            }
            const double tr_half = 0.5 * (gxx + gyy);
            const double disc = std::sqrt(0.25 * (gxx - gyy) * (gxx - gyy) + gxy * gxy);
            const double min_eig = tr_half - disc;
            const double det = gxx * gyy - gxy * gxy;
            if (!(min_eig >= eig_threshold) || !(det > 0.0)) {
                ok = false;
                break;
            }

            double vx = 0.0, vy = 0.0;
            for (int it = 0; it < params.max_iter; ++it) {
                const detail::WindowSampler at_next(px + gx + vx, py + gy + vy, radius);
                at_next.sample(img_j, pj);
                at_next.inside(img_j.width(), img_j.height(), mj);
                double bx = 0, by = 0;
                for (std::size_t t = 0; t < pi.size(); ++t) {
                    const double diff = (pi[t] - pj[t]) * mj[t];
                    bx += diff * pix[t];
                    by += diff * piy[t];
                }
                const double ex = (gyy * bx - gxy * by) / det;
                const double ey = (gxx * by - gxy * bx) / det;
                vx += ex;
                vy += ey;
                if (std::hypot(ex, ey) < params.eps) break;
            }
            if (level > 0) {
                gx = 2.0 * (gx + vx);
                gy = 2.0 * (gy + vy);
            } else {
                gx += vx;
                gy += vy;
            }
        }
        if (!ok || !std::isfinite(gx) || !std::isfinite(gy)) continue;
        if (!detail::window_inside(p.x + gx, p.y + gy, radius, next.width(), next.height())) continue;
        flow.u[k] = {gx, gy};
        flow.status[k] = TrackStatus::Tracked;
    }
    return flow;
}

}  // namespace ofnav
