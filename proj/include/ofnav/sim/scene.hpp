#pragma once

// World description: a rectangular arena, a textured floor, a distant backdrop
// and vertical textured panels standing on the floor.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ofnav/config.hpp"
#include "ofnav/distribution.hpp"
#include "ofnav/error.hpp"
#include "ofnav/nav.hpp"

namespace ofnav::sim {

/// Vertical rectangle. (x, y) is the centre of its bottom edge; yaw is the
/// direction of its face normal. The panel extends width/2 either side along
/// (-sin yaw, cos yaw) and is textured identically on both faces.
struct Obstacle {
    double x = 0.0;
    double y = 0.0;
    double yaw = 0.0;
    double width = 0.5;
    double height = 0.35;
    std::uint64_t seed = 1;

    Point2 a() const { return {x + 0.5 * width * std::sin(yaw), y - 0.5 * width * std::cos(yaw)}; }
    Point2 b() const { return {x - 0.5 * width * std::sin(yaw), y + 0.5 * width * std::cos(yaw)}; }
};

struct Arena {
    double min_x = -5.0, min_y = -5.0, max_x = 5.0, max_y = 5.0;

    bool contains(double x, double y) const { return x >= min_x && x <= max_x && y >= min_y && y <= max_y; }
};

struct Scene {
    Arena arena;
    std::vector<Obstacle> obstacles;
    std::uint64_t floor_seed = 7;
    std::uint64_t backdrop_seed = 11;

    void validate() const {
        require(arena.min_x < arena.max_x && arena.min_y < arena.max_y, "scene: empty arena");
        for (const auto& o : obstacles) {
            require(o.width > 0.0 && o.height > 0.0, "scene: obstacle width and height must be > 0");
            require(std::isfinite(o.x) && std::isfinite(o.y) && std::isfinite(o.yaw), "scene: non-finite obstacle pose");
            require(arena.contains(o.a().x, o.a().y) && arena.contains(o.b().x, o.b().y),
                    "scene: obstacle outside arena bounds");
        }
    }
};

struct CameraModel {
    int width = 320;
    int height = 240;
    double hfov = 1.05;            // rad
    double mount_height = 0.12;    // m above floor
    double forward_offset = 0.1065;  // m ahead of the robot centre
    double noise_sigma = 0.0;      // grey levels; 0 disables noise

    void validate() const {
        require(width >= 2 && height >= 2, "camera: image must be at least 2x2");
        require(hfov > 0.0 && hfov < std::numbers::pi, "camera: FOV must be in (0, pi)");
        require(mount_height > 0.0, "camera: mount height must be > 0");
        require(noise_sigma >= 0.0, "camera: noise sigma must be >= 0");
    }

    double focal_px() const { return 0.5 * width / std::tan(0.5 * hfov); }

    Point2 position(const RobotPose& p) const {
        return {p.x + forward_offset * std::cos(p.heading), p.y + forward_offset * std::sin(p.heading)};
    }
};

// ---------------------------------------------------------------------------
// geometry

struct RayHit {
    double t = 0.0;  // distance along the unit ray
    double s = 0.0;  // distance from endpoint a along the panel
};

/// Intersection of the ray o + t d (|d| = 1, t > 0) with segment [a, b].
inline std::optional<RayHit> ray_segment(Point2 o, Point2 d, Point2 a, Point2 b) {
    const double ex = b.x - a.x, ey = b.y - a.y;
    const double den = d.x * ey - d.y * ex;
    if (std::abs(den) < 1e-15) return std::nullopt;
    const double wx = a.x - o.x, wy = a.y - o.y;
    const double t = (wx * ey - wy * ex) / den;
    const double u = (wx * d.y - wy * d.x) / den;
    if (t <= 1e-9 || u < 0.0 || u > 1.0) return std::nullopt;
    return RayHit{t, u * std::hypot(ex, ey)};
}

inline double point_segment_distance(Point2 p, Point2 a, Point2 b) {
    const double ex = b.x - a.x, ey = b.y - a.y;
    const double len2 = ex * ex + ey * ey;
    double u = len2 > 0.0 ? ((p.x - a.x) * ex + (p.y - a.y) * ey) / len2 : 0.0;
    u = std::clamp(u, 0.0, 1.0);
    return std::hypot(p.x - (a.x + u * ex), p.y - (a.y + u * ey));
}

inline constexpr double kRangeMinCm = 2.0;
inline constexpr double kRangeMaxCm = 400.0;
inline constexpr double kCollisionRadius = 0.131;  // half the chassis diagonal

/// Range from the sensor mount to the nearest panel, in cm, clamped to [2, 400].
/// A zero beam half-angle casts the single forward ray; a positive one takes the
/// nearest return over a fan of rays spanning the cone, like an ultrasonic sensor.
inline double range_sensor(const Scene& scene, const RobotPose& pose, const CameraModel& cam = {},
                           double beam_half_angle = 0.0) {
    require(beam_half_angle >= 0.0 && beam_half_angle < std::numbers::pi / 2, "range_sensor: bad beam angle");
    const Point2 o = cam.position(pose);
    const int rays = beam_half_angle > 0.0 ? 33 : 1;
    double best = std::numeric_limits<double>::infinity();
    for (int k = 0; k < rays; ++k) {
        const double off = rays == 1 ? 0.0 : beam_half_angle * (2.0 * k / (rays - 1) - 1.0);
        const Point2 d{std::cos(pose.heading + off), std::sin(pose.heading + off)};
        for (const auto& ob : scene.obstacles) {
            if (auto h = ray_segment(o, d, ob.a(), ob.b())) best = std::min(best, h->t);
        }
    }
    if (!std::isfinite(best)) return kRangeMaxCm;
    return std::clamp(100.0 * best, kRangeMinCm, kRangeMaxCm);
}

/// Index of the first obstacle whose panel intersects the robot disc.
inline std::optional<std::size_t> collision(const Scene& scene, const RobotPose& pose,
                                            double radius = kCollisionRadius) {
    for (std::size_t i = 0; i < scene.obstacles.size(); ++i) {
        const auto& o = scene.obstacles[i];
        if (point_segment_distance({pose.x, pose.y}, o.a(), o.b()) < radius) return i;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// files

/// Recording protocol: the robot drives laps through `positions`, evading the
/// panel at each one. Recordings 1..4 rotate panels among positions; 5..8
/// repeat the rotation driving the circuit in the opposite direction.
struct CircuitSpec {
    std::vector<Point2> positions;
    int laps = 1;
    int recordings = 8;
    double trigger_min_cm = 20.0;
    double trigger_max_cm = 50.0;
    double heading_jitter = 0.05;  // rad
    double lateral_jitter = 0.08;  // m
    double beam_half_angle = 0.26;  // rad; labelling sensor cone
    bool record_turns = false;
};

struct SceneFile {
    Scene scene;
    std::optional<RobotPose> start;
    std::optional<CircuitSpec> circuit;
    std::vector<SteerKind> expected_evades;
};

namespace detail {

inline SteerKind steer_from_string(const std::string& s) {
    if (s == "left" || s == "evade_left") return SteerKind::EvadeLeft;
    if (s == "right" || s == "evade_right") return SteerKind::EvadeRight;
    fail(ErrorKind::DataFormat, "scene: unknown evade direction '" + s + "'");
}

inline Point2 point_from_json(const nlohmann::json& j) {
    if (!j.is_array() || j.size() != 2) fail(ErrorKind::DataFormat, "scene: points are [x, y] pairs");
    return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace detail

inline nlohmann::json to_json(const SceneFile& f) {
    nlohmann::json j;
    const auto& a = f.scene.arena;
    j["arena"] = {{"min", {a.min_x, a.min_y}}, {"max", {a.max_x, a.max_y}}};
    j["floor_seed"] = f.scene.floor_seed;
    j["backdrop_seed"] = f.scene.backdrop_seed;
    j["obstacles"] = nlohmann::json::array();
    for (const auto& o : f.scene.obstacles) {
        j["obstacles"].push_back(
            {{"x", o.x}, {"y", o.y}, {"yaw", o.yaw}, {"width", o.width}, {"height", o.height}, {"seed", o.seed}});
    }
    if (f.start) j["start"] = {{"x", f.start->x}, {"y", f.start->y}, {"heading", f.start->heading}};
    if (f.circuit) {
        const auto& c = *f.circuit;
        nlohmann::json pos = nlohmann::json::array();
        for (const auto& p : c.positions) pos.push_back({p.x, p.y});
        j["circuit"] = {{"positions", pos},
                        {"laps", c.laps},
                        {"recordings", c.recordings},
                        {"trigger_cm", {c.trigger_min_cm, c.trigger_max_cm}},
                        {"heading_jitter", c.heading_jitter},
                        {"lateral_jitter", c.lateral_jitter},
                        {"beam_half_angle", c.beam_half_angle},
                        {"record_turns", c.record_turns}};
    }
    if (!f.expected_evades.empty()) {
        j["expected_evades"] = nlohmann::json::array();
        for (auto k : f.expected_evades) j["expected_evades"].push_back(k == SteerKind::EvadeLeft ? "left" : "right");
    }
    return j;
}

inline SceneFile scene_from_json(const nlohmann::json& j) {
    SceneFile f;
    try {
        ofnav::detail::reject_unknown(j, {"arena", "floor_seed", "backdrop_seed", "obstacles", "start", "circuit",
                                          "expected_evades", "comment"},
                                      "");
        if (j.contains("arena")) {
            const auto& a = j.at("arena");
            ofnav::detail::reject_unknown(a, {"min", "max"}, "arena.");
            const auto lo = detail::point_from_json(a.at("min"));
            const auto hi = detail::point_from_json(a.at("max"));
            f.scene.arena = {lo.x, lo.y, hi.x, hi.y};
        }
        ofnav::detail::read_if(j, "floor_seed", f.scene.floor_seed);
        ofnav::detail::read_if(j, "backdrop_seed", f.scene.backdrop_seed);
        if (j.contains("obstacles")) {
            for (const auto& oj : j.at("obstacles")) {
                ofnav::detail::reject_unknown(oj, {"x", "y", "yaw", "width", "height", "seed"}, "obstacles[].");
                Obstacle o;
                o.x = oj.at("x").get<double>();
                o.y = oj.at("y").get<double>();
                ofnav::detail::read_if(oj, "yaw", o.yaw);
                ofnav::detail::read_if(oj, "width", o.width);
                ofnav::detail::read_if(oj, "height", o.height);
                ofnav::detail::read_if(oj, "seed", o.seed);
                f.scene.obstacles.push_back(o);
            }
        }
        if (j.contains("start")) {
            const auto& s = j.at("start");
            ofnav::detail::reject_unknown(s, {"x", "y", "heading"}, "start.");
            f.start = RobotPose{s.at("x").get<double>(), s.at("y").get<double>(), s.value("heading", 0.0)};
        }
        if (j.contains("circuit")) {
            const auto& c = j.at("circuit");
            ofnav::detail::reject_unknown(c, {"positions", "laps", "recordings", "trigger_cm", "heading_jitter",
                                              "lateral_jitter", "beam_half_angle", "record_turns"},
                                          "circuit.");
            CircuitSpec cs;
            for (const auto& p : c.at("positions")) cs.positions.push_back(detail::point_from_json(p));
            ofnav::detail::read_if(c, "laps", cs.laps);
            ofnav::detail::read_if(c, "recordings", cs.recordings);
            if (c.contains("trigger_cm")) {
                const auto t = detail::point_from_json(c.at("trigger_cm"));
                cs.trigger_min_cm = t.x;
                cs.trigger_max_cm = t.y;
            }
            ofnav::detail::read_if(c, "heading_jitter", cs.heading_jitter);
            ofnav::detail::read_if(c, "lateral_jitter", cs.lateral_jitter);
            ofnav::detail::read_if(c, "beam_half_angle", cs.beam_half_angle);
            ofnav::detail::read_if(c, "record_turns", cs.record_turns);
            f.circuit = cs;
        }
        if (j.contains("expected_evades")) {
            for (const auto& e : j.at("expected_evades")) f.expected_evades.push_back(detail::steer_from_string(e.get<std::string>()));
        }
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::DataFormat, std::string("scene: ") + e.what());
    }
    try {
        f.scene.validate();
        if (f.start) require(f.scene.arena.contains(f.start->x, f.start->y), "scene: start pose outside arena");
        if (f.circuit) {
            const auto& c = *f.circuit;
            require(c.positions.size() >= 2, "scene: circuit needs at least 2 positions");
            require(c.positions.size() <= f.scene.obstacles.size(), "scene: circuit needs one obstacle per position");
            require(c.laps >= 1, "scene: circuit needs at least one lap");
            require(c.recordings >= 1, "scene: circuit needs at least one recording");
            require(c.beam_half_angle >= 0.0 && c.beam_half_angle < 1.5, "scene: bad beam half-angle");
            require(c.trigger_min_cm > 0.0 && c.trigger_min_cm <= c.trigger_max_cm, "scene: bad trigger range");
        }
    } catch (const Error& e) {
        fail(ErrorKind::DataFormat, e.what());
    }
    return f;
}

inline SceneFile load_scene(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::DataFormat, "cannot open scene file " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::DataFormat, path + ": " + e.what());
    }
    return scene_from_json(j);
}

}  // namespace ofnav::sim
