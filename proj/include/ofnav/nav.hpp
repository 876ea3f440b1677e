#pragma once

// Steering policy and the differential-drive actuation model.
//
// Conventions: theta = pi/2 turns right, theta = 3pi/2 turns left. Heading is
// counter-clockwise positive in the world frame, so a right turn lowers it.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "ofnav/error.hpp"
#include "ofnav/features.hpp"
#include "ofnav/lk.hpp"

namespace ofnav {

enum class SteerKind { Straight, EvadeLeft, EvadeRight };

inline std::string to_string(SteerKind k) {
    switch (k) {
        case SteerKind::Straight: return "straight";
        case SteerKind::EvadeLeft: return "evade_left";
        case SteerKind::EvadeRight: return "evade_right";
    }
    return "straight";
}

struct SteerDecision {
    SteerKind kind = SteerKind::Straight;
    double duration_ms = 0.0;  // > 0 for evades

    bool evading() const noexcept { return kind != SteerKind::Straight; }
};

inline constexpr double kEvadeDurationMs = 200.0;

/// Mean tracked flow magnitude on each side of x = width/2. An empty side is +inf.
struct HalfMeans {
    double left = std::numeric_limits<double>::infinity();
    double right = std::numeric_limits<double>::infinity();
};

inline HalfMeans half_means(const FlowField& flow, int image_width) {
    require(image_width >= 1, "decide: image width must be >= 1");
    const double split = image_width / 2.0;
    double sum[2] = {0.0, 0.0};
    std::size_t n[2] = {0, 0};
    for (std::size_t i = 0; i < flow.size(); ++i) {
        if (!flow.tracked(i)) continue;
        const double dx = flow.points[i].x - split;
        if (std::abs(dx) <= 1e-6) continue;
        const int side = dx < 0 ? 0 : 1;
        sum[side] += std::hypot(flow.u[i].x, flow.u[i].y);
        ++n[side];
    }
    HalfMeans m;
    if (n[0]) m.left = sum[0] / static_cast<double>(n[0]);
    if (n[1]) m.right = sum[1] / static_cast<double>(n[1]);
    return m;
}

/// Evade toward the half with the smaller mean flow; equal means (relative 1e-12) evade right.
inline SteerDecision decide(const FlowField& flow, Label obstacle, int image_width, HalfMeans* means = nullptr) {
    const HalfMeans m = half_means(flow, image_width);
    if (means) *means = m;
    if (obstacle == Label::Negative) return {SteerKind::Straight, 0.0};
    const bool tie = m.left == m.right || (std::isfinite(m.left) && std::isfinite(m.right) &&
                                           std::abs(m.left - m.right) <= 1e-12 * std::max(m.left, m.right));
    if (!tie && m.left < m.right) return {SteerKind::EvadeLeft, kEvadeDurationMs};
    return {SteerKind::EvadeRight, kEvadeDurationMs};
}

struct VelocityCommand {
    double magnitude_pct = 0.0;  // [0, 100]
    double theta = 0.0;          // rad
};

inline VelocityCommand cruise_command(double duty = 50.0) { return {duty, 0.0}; }

inline VelocityCommand evade_command(SteerKind k, double duty = 60.0) {
    switch (k) {
        case SteerKind::EvadeRight: return {duty, std::numbers::pi / 2.0};
        case SteerKind::EvadeLeft: return {duty, 3.0 * std::numbers::pi / 2.0};
        case SteerKind::Straight: break;
    }
    return cruise_command();
}

struct VelocityComponents {
    double linear = 0.0;
    double angular = 0.0;
};

/// (m cos theta, m sin theta)
inline VelocityComponents velocity_components(const VelocityCommand& cmd) {
    return {cmd.magnitude_pct * std::cos(cmd.theta), cmd.magnitude_pct * std::sin(cmd.theta)};
}

enum class WheelDir { Forward, Reverse };

struct WheelState {
    double left_duty = 0.0;   // [0, 100]
    double right_duty = 0.0;  // [0, 100]
    WheelDir left_dir = WheelDir::Forward;
    WheelDir right_dir = WheelDir::Forward;

    bool operator==(const WheelState&) const = default;
};

/// The angular differential goes to the outer wheel, then the linear term is
/// added to both; saturation at 100 shrinks the common term, never the differential.
inline WheelState apply_command(const VelocityCommand& cmd) {
    require(cmd.magnitude_pct >= 0.0 && cmd.magnitude_pct <= 100.0, "apply_command: magnitude must be in [0,100]");
    require(std::isfinite(cmd.theta), "apply_command: theta must be finite");
    const double c = std::cos(cmd.theta);
    const double s = std::sin(cmd.theta);
    auto snap = [](double v) { return std::abs(v) < 1e-9 ? 0.0 : v; };
    const double v_l = snap(cmd.magnitude_pct * c);
    const double v_a = snap(cmd.magnitude_pct * s);

    WheelState w;
    const WheelDir dir = c < -1e-12 ? WheelDir::Reverse : WheelDir::Forward;
    w.left_dir = w.right_dir = dir;
    const double diff = std::min(std::abs(v_a), 100.0);
    const double common = std::min(std::abs(v_l), 100.0 - diff);
    w.left_duty = w.right_duty = common;
    if (v_a > 0) w.left_duty += diff;        // right turn: left wheel is outer
    else if (v_a < 0) w.right_duty += diff;  // left turn: right wheel is outer
    return w;
}

/// Maps any finite angle into [-pi, pi).
inline double wrap_angle(double a) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double r = std::fmod(a + std::numbers::pi, two_pi);
    if (r < 0) r += two_pi;
    return r - std::numbers::pi;
}

struct RobotPose {
    double x = 0.0;        // m
    double y = 0.0;        // m
    double heading = 0.0;  // rad, CCW from +x

    bool operator==(const RobotPose&) const = default;
};

struct DriveParams {
    double kappa = 0.002;       // m/s per % duty; duty 50 -> 0.1 m/s
    double track_width = 0.153;  // m
};

struct BodyVelocity {
    double v = 0.0;      // m/s
    double omega = 0.0;  // rad/s, CCW positive
};

inline BodyVelocity body_velocity(const WheelState& s, const DriveParams& p = {}) {
    const double vl = p.kappa * s.left_duty * (s.left_dir == WheelDir::Forward ? 1.0 : -1.0);
    const double vr = p.kappa * s.right_duty * (s.right_dir == WheelDir::Forward ? 1.0 : -1.0);
    return {(vl + vr) / 2.0, (vr - vl) / p.track_width};
}

/// Exact arc integration of constant wheel speeds over dt. Heading stays in [-pi, pi).
inline RobotPose drive_kinematics(const WheelState& s, const RobotPose& pose, double dt, const DriveParams& p = {}) {
    require(dt > 0.0, "drive_kinematics: dt must be > 0");
    require(p.kappa >= 0.0 && p.track_width > 0.0, "drive_kinematics: bad drive parameters");
    const auto [v, w] = body_velocity(s, p);
    RobotPose out = pose;
    if (v == 0.0 && w == 0.0) return out;
    const double h1 = pose.heading + w * dt;
    if (std::abs(w) < 1e-12) {
        out.x += v * dt * std::cos(pose.heading);
        out.y += v * dt * std::sin(pose.heading);
    } else {
        const double r = v / w;
        out.x += r * (std::sin(h1) - std::sin(pose.heading));
        out.y -= r * (std::cos(h1) - std::cos(pose.heading));
    }
    out.heading = wrap_angle(h1);
    return out;
}

}  // namespace ofnav
