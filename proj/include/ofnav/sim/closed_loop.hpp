#pragma once

// Autonomous runs: render, flow against the previous cruise frame, classify,
// decide, actuate, integrate. An evade lasts 200 ms; frames are not classified
// while it runs and the next classification uses a fresh cruise frame pair.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <vector>

#include "ofnav/classifier.hpp"
#include "ofnav/dataset.hpp"
#include "ofnav/nav.hpp"
#include "ofnav/sim/render.hpp"
#include "ofnav/sim/scene.hpp"

namespace ofnav::sim {

struct ClosedLoopOptions {
    CameraModel camera;
    DriveParams drive;
    double dt = 0.1;  // s per tick
    double cruise_duty = 50.0;
    double evade_duty = 60.0;
    int max_steps = 1500;
    std::uint64_t noise_seed = 0;
    std::function<void(int step, const GrayImage& frame)> on_frame;
};

enum class Termination { MaxSteps, ArenaExit, Collision };

inline std::string to_string(Termination t) {
    switch (t) {
        case Termination::MaxSteps: return "max_steps";
        case Termination::ArenaExit: return "arena_exit";
        case Termination::Collision: return "collision";
    }
    return "max_steps";
}

struct TrajectoryRow {
    int step = 0;
    RobotPose pose;    // after the step
    double range_cm = 0.0;
    int prediction = 0;  // -1/+1, 0 when no frame pair was classified this step
    SteerKind decision = SteerKind::Straight;
};

struct DecisionRow {
    int tick = 0;
    Label obstacle = Label::Negative;
    HalfMeans means;
    SteerKind decision = SteerKind::Straight;
    WheelState wheels;
};

struct EvadeEvent {
    int tick = 0;
    SteerKind kind = SteerKind::EvadeRight;
    RobotPose pose;
    std::optional<std::size_t> nearest_obstacle;  // panel closest to the robot centre
    double nearest_distance = std::numeric_limits<double>::infinity();
};

struct ClosedLoopResult {
    std::vector<TrajectoryRow> trajectory;
    std::vector<DecisionRow> decisions;
    std::vector<EvadeEvent> evades;
    std::size_t collisions = 0;
    Termination termination = Termination::MaxSteps;
    RobotPose final_pose;
};

using FeatureClassifier = std::function<Label(const FeatureVector&)>;

inline ClosedLoopResult run_closed_loop(const Scene& scene, const RobotPose& start, const PipelineConfig& flow_cfg,
                                        const FeatureClassifier& classify, const ClosedLoopOptions& opt = {}) {
    scene.validate();
    opt.camera.validate();
    require(opt.dt > 0.0 && opt.max_steps >= 0, "closed loop: bad timing parameters");
    require(static_cast<bool>(classify), "closed loop: classifier is empty");
    if (!scene.arena.contains(start.x, start.y)) fail(ErrorKind::InvalidArgument, "closed loop: start outside arena");

    const FlowExtractor flow(flow_cfg, opt.camera.width, opt.camera.height);
    const int evade_ticks = std::max(1, static_cast<int>(std::lround(kEvadeDurationMs / (1000.0 * opt.dt))));
    const WheelState cruise = apply_command(cruise_command(opt.cruise_duty));

    ClosedLoopResult res;
    RobotPose pose = start;
    std::optional<GrayImage> prev;
    WheelState evade_wheels;
    SteerKind evade_kind = SteerKind::Straight;
    int evade_left = 0;

    for (int step = 0; step < opt.max_steps; ++step) {
        TrajectoryRow row;
        row.step = step;
        WheelState wheels = cruise;
        if (evade_left > 0) {
            wheels = evade_wheels;
            row.decision = evade_kind;
            --evade_left;
        } else {
            const GrayImage frame = render(scene, pose, opt.camera, opt.noise_seed * 7919ull + static_cast<std::uint64_t>(step));
            if (opt.on_frame) opt.on_frame(step, frame);
            GrayImage cur = flow.prepare(frame);
            if (prev) {
                const FlowField fl = flow.track(*prev, cur);
                const Label obstacle = classify(flow_to_feature(fl));
                DecisionRow d;
                d.tick = step;
                d.obstacle = obstacle;
                const SteerDecision sd = decide(fl, obstacle, opt.camera.width, &d.means);
                d.decision = sd.kind;
                row.prediction = to_int(obstacle);
                row.decision = sd.kind;
                if (sd.evading()) {
                    evade_kind = sd.kind;
                    evade_wheels = apply_command(evade_command(sd.kind, opt.evade_duty));
                    wheels = evade_wheels;
                    evade_left = evade_ticks - 1;
                    EvadeEvent ev;
                    ev.tick = step;
                    ev.kind = sd.kind;
                    ev.pose = pose;
                    for (std::size_t i = 0; i < scene.obstacles.size(); ++i) {
                        const auto& ob = scene.obstacles[i];
                        const double dist = point_segment_distance({pose.x, pose.y}, ob.a(), ob.b());
                        if (dist < ev.nearest_distance) {
                            ev.nearest_distance = dist;
                            ev.nearest_obstacle = i;
                        }
                    }
                    res.evades.push_back(ev);
                }
                d.wheels = wheels;
                res.decisions.push_back(d);
            }
            prev = row.decision != SteerKind::Straight ? std::nullopt : std::optional<GrayImage>(std::move(cur));
        }

        pose = drive_kinematics(wheels, pose, opt.dt, opt.drive);
        row.pose = pose;
        const bool inside = scene.arena.contains(pose.x, pose.y);
        row.range_cm = range_sensor(scene, pose, opt.camera);
        res.trajectory.push_back(row);
        if (collision(scene, pose)) {
            ++res.collisions;
            res.termination = Termination::Collision;
            break;
        }
        if (!inside) {
            res.termination = Termination::ArenaExit;
            break;
        }
    }
    res.final_pose = pose;
    return res;
}

inline ClosedLoopResult run_closed_loop(const Scene& scene, const RobotPose& start, const Classifier& model,
                                        const ClosedLoopOptions& opt = {}) {
    return run_closed_loop(
        scene, start, model.config(), [&](const FeatureVector& fv) { return model.classify(fv); }, opt);
}

/// First evade made while approaching each panel, in the order the panels were met.
struct CourseEpisode {
    std::size_t obstacle = 0;
    SteerKind kind = SteerKind::EvadeRight;
    int tick = 0;
};

struct CourseVerdict {
    std::vector<CourseEpisode> episodes;
    std::size_t collisions = 0;
    bool passed_last = false;  // final pose lies behind the plane of the last panel
    bool directions_match = false;

    bool completed() const { return collisions == 0 && passed_last && directions_match; }
};

/// Scores a run against the scene's expected evades. An evade counts toward a
/// panel when that panel is the nearest one and the robot is still on its face
/// side; later evades near the same panel (corrections while passing it) and
/// evades far from every panel are ignored. Panels are expected in file order.
inline CourseVerdict assess_course(const SceneFile& file, const ClosedLoopResult& run, double engage_m = 1.5) {
    const auto& obs = file.scene.obstacles;
    CourseVerdict v;
    v.collisions = run.collisions;
    std::vector<char> seen(obs.size(), 0);
    for (const auto& e : run.evades) {
        if (!e.nearest_obstacle || e.nearest_distance > engage_m) continue;
        const std::size_t i = *e.nearest_obstacle;
        const auto& o = obs[i];
        const double ahead = (e.pose.x - o.x) * std::cos(o.yaw) + (e.pose.y - o.y) * std::sin(o.yaw);
        if (ahead <= 0.0 || seen[i]) continue;
        seen[i] = 1;
        v.episodes.push_back({i, e.kind, e.tick});
    }
    if (!obs.empty()) {
        const auto& last = obs.back();
        const double ahead =
            (run.final_pose.x - last.x) * std::cos(last.yaw) + (run.final_pose.y - last.y) * std::sin(last.yaw);
        v.passed_last = ahead < 0.0;
    }
    v.directions_match = !file.expected_evades.empty() && v.episodes.size() == file.expected_evades.size();
    for (std::size_t k = 0; v.directions_match && k < v.episodes.size(); ++k) {
        v.directions_match = v.episodes[k].obstacle == k && v.episodes[k].kind == file.expected_evades[k];
    }
    return v;
}

/// Trajectory CSV: step,x,y,heading,range_cm,prediction,decision.
inline void write_trajectory(std::ostream& out, const ClosedLoopResult& r) {
    using ofnav::detail::format_double;
    out << "step,x,y,heading,range_cm,prediction,decision\n";
    for (const auto& t : r.trajectory) {
        out << t.step << ',' << format_double(t.pose.x) << ',' << format_double(t.pose.y) << ','
            << format_double(t.pose.heading) << ',' << format_double(t.range_cm) << ',' << t.prediction << ','
            << to_string(t.decision) << '\n';
    }
}

/// Decision log CSV: tick,obstacle,left_mean,right_mean,decision,left_duty,right_duty.
inline void write_decision_log(std::ostream& out, const ClosedLoopResult& r) {
    using ofnav::detail::format_double;
    out << "tick,obstacle,left_mean,right_mean,decision,left_duty,right_duty\n";
    for (const auto& d : r.decisions) {
        out << d.tick << ',' << to_int(d.obstacle) << ',' << format_double(d.means.left) << ','
            << format_double(d.means.right) << ',' << to_string(d.decision) << ',' << format_double(d.wheels.left_duty)
            << ',' << format_double(d.wheels.right_duty) << '\n';
    }
}

}  // namespace ofnav::sim
