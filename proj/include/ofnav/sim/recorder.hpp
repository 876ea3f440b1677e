#pragma once

// Scripted dataset capture. A pilot with access to ground-truth range drives
// the circuit at cruise duty, recording one labelled flow sample per cruise
// frame pair, and evades each panel once the range drops below a jittered
// trigger distance.

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ofnav/classifier.hpp"
#include "ofnav/config.hpp"
#include "ofnav/dataset.hpp"
#include "ofnav/features.hpp"
#include "ofnav/nav.hpp"
#include "ofnav/sim/render.hpp"
#include "ofnav/sim/scene.hpp"

namespace ofnav::sim {

struct RecorderOptions {
    CameraModel camera;
    DriveParams drive;
    PipelineConfig pipeline;  // ring layout, LK parameters and label thresholds
    double dt = 0.1;           // s per frame
    double cruise_duty = 50.0;
    double evade_duty = 60.0;
    int max_leg_steps = 2000;
    std::uint64_t seed = 0;
};

namespace detail {

/// Uniform draws from a fixed engine, identical on every platform.
class Jitter {
public:
    explicit Jitter(std::uint64_t seed) : rng_(seed) {}
    double uniform(double lo, double hi) { return lo + (hi - lo) * static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

private:
    std::mt19937_64 rng_;
};

inline double bearing(Point2 from, Point2 to) { return std::atan2(to.y - from.y, to.x - from.x); }

inline Point2 unit(Point2 from, Point2 to) {
    const double n = std::hypot(to.x - from.x, to.y - from.y);
    return {(to.x - from.x) / n, (to.y - from.y) / n};
}

/// Frame-pair sampler: keeps the previous conditioned frame and emits one sample per step.
class SampleTap {
public:
    SampleTap(const Scene& scene, const RecorderOptions& opt, double beam_half_angle)
        : scene_(scene), opt_(opt), beam_(beam_half_angle), flow_(opt.pipeline, opt.camera.width, opt.camera.height) {}

    void reset() { prev_.reset(); }

    void prime(const RobotPose& pose) { prev_ = flow_.prepare(render(scene_, pose, opt_.camera)); }

    /// Requires prime(); tracks prev -> frame at `pose` and labels it from the range at `pose`.
    LabeledSample sample(const RobotPose& pose) {
        GrayImage cur = flow_.prepare(render(scene_, pose, opt_.camera));
        const FlowField fl = flow_.track(*prev_, cur);
        prev_ = std::move(cur);
        LabeledSample s;
        s.features = flow_to_feature(fl);
        s.distance_cm = range_sensor(scene_, pose, opt_.camera, beam_);
        s.label = label_from_range(*s.distance_cm, opt_.pipeline.labels);
        return s;
    }

    bool primed() const { return prev_.has_value(); }

private:
    const Scene& scene_;
    const RecorderOptions& opt_;
    double beam_;
    FlowExtractor flow_;
    std::optional<GrayImage> prev_;
};

}  // namespace detail

/// Drives straight from `start` for up to `max_steps` frames, stopping early once
/// the range drops below `stop_cm`. Used to check the label step property.
inline std::vector<LabeledSample> record_straight_pass(const Scene& scene, const RobotPose& start, int max_steps,
                                                       double stop_cm, const RecorderOptions& opt = {},
                                                       double beam_half_angle = 0.0) {
    scene.validate();
    detail::SampleTap tap(scene, opt, beam_half_angle);
    const WheelState cruise = apply_command(cruise_command(opt.cruise_duty));
    RobotPose pose = start;
    tap.prime(pose);
    std::vector<LabeledSample> out;
    for (int k = 0; k < max_steps; ++k) {
        const RobotPose next = drive_kinematics(cruise, pose, opt.dt, opt.drive);
        if (!scene.arena.contains(next.x, next.y) || collision(scene, next)) break;
        pose = next;
        out.push_back(tap.sample(pose));
        if (*out.back().distance_cm < stop_cm) break;
    }
    return out;
}

/// Obstacle placement for recording r (0-based): panel (j + r) mod n stands at position j.
/// Floor and backdrop textures change from one recording to the next.
inline Scene arrange_circuit(const Scene& base, const CircuitSpec& c, int r) {
    Scene s = base;
    s.floor_seed = base.floor_seed + 7919ull * static_cast<std::uint64_t>(r);
    s.backdrop_seed = base.backdrop_seed + 104729ull * static_cast<std::uint64_t>(r);
    const std::size_t n = c.positions.size();
    const bool reversed = (static_cast<std::size_t>(r) / n) % 2 == 1;
    for (std::size_t j = 0; j < n; ++j) {
        auto& ob = s.obstacles[(j + static_cast<std::size_t>(r)) % n];
        ob.x = c.positions[j].x;
        ob.y = c.positions[j].y;
        const std::size_t prev = reversed ? (j + 1) % n : (j + n - 1) % n;
        ob.yaw = detail::bearing(c.positions[j], c.positions[prev]);
    }
    return s;
}

struct RecordingStats {
    std::size_t samples = 0;
    std::size_t positives = 0;
    std::size_t legs = 0;
    std::size_t collisions = 0;
};

/// Runs every recording of the circuit; Dataset::recording holds 1-based recording ids.
inline Dataset record_dataset(const Scene& base, const CircuitSpec& c, const RecorderOptions& opt,
                              std::vector<RecordingStats>* stats = nullptr) {
    require(c.positions.size() >= 2 && c.positions.size() <= base.obstacles.size(),
            "record_dataset: need one obstacle per circuit position");
    require(c.laps >= 1 && c.recordings >= 1, "record_dataset: laps and recordings must be >= 1");
    opt.camera.validate();
    opt.pipeline.validate();

    Dataset ds;
    if (stats) stats->clear();
    const std::size_t n = c.positions.size();
    const WheelState cruise = apply_command(cruise_command(opt.cruise_duty));
    const int evade_ticks = std::max(1, static_cast<int>(std::lround(kEvadeDurationMs / (1000.0 * opt.dt))));

    for (int r = 0; r < c.recordings; ++r) {
        Scene scene = arrange_circuit(base, c, r);
        scene.validate();
        const bool reversed = (static_cast<std::size_t>(r) / n) % 2 == 1;
        std::vector<Point2> route;
        for (std::size_t j = 0; j < n; ++j) route.push_back(c.positions[reversed ? (n - j) % n : j]);

        detail::Jitter jit(opt.seed * 1000003ull + static_cast<std::uint64_t>(r) + 1);
        detail::SampleTap tap(scene, opt, c.beam_half_angle);
        RecordingStats st;

        // as if just finished evading the panel at the last route position
        const Point2 last = route[n - 1];
        const Point2 back = detail::unit(route[n - 2], last);
        RobotPose pose{last.x - 0.45 * back.x, last.y - 0.45 * back.y, detail::bearing(last, route[0])};

        auto emit = [&](const LabeledSample& s) {
            ds.samples.push_back(s);
            ds.recording.push_back(r + 1);
            ++st.samples;
            if (s.label == Label::Positive) ++st.positives;
        };

        for (int lap = 0; lap < c.laps; ++lap) {
            for (std::size_t leg = 0; leg < n; ++leg) {
                const Point2 target = route[leg];
                // the panel ahead faces the robot for this leg
                for (auto& ob : scene.obstacles) {
                    if (ob.x == target.x && ob.y == target.y) ob.yaw = detail::bearing(target, {pose.x, pose.y});
                }
                const Point2 dir = detail::unit({pose.x, pose.y}, target);
                const double lateral = jit.uniform(-c.lateral_jitter, c.lateral_jitter);
                const Point2 aim{target.x - lateral * dir.y, target.y + lateral * dir.x};
                const double goal_heading = detail::bearing({pose.x, pose.y}, aim) +
                                            jit.uniform(-c.heading_jitter, c.heading_jitter);
                const double trigger = jit.uniform(c.trigger_min_cm, c.trigger_max_cm);

                // turn with evade manoeuvres, then trim the residual in place
                tap.reset();
                for (int chunk = 0; chunk < 64; ++chunk) {
                    const double err = wrap_angle(goal_heading - pose.heading);
                    if (std::abs(err) < 0.08) break;
                    const auto kind = err > 0 ? SteerKind::EvadeLeft : SteerKind::EvadeRight;
                    const WheelState w = apply_command(evade_command(kind, opt.evade_duty));
                    for (int t = 0; t < evade_ticks; ++t) {
                        if (c.record_turns && !tap.primed()) tap.prime(pose);
                        pose = drive_kinematics(w, pose, opt.dt, opt.drive);
                        if (c.record_turns) emit(tap.sample(pose));
                    }
                }
                pose.heading = wrap_angle(goal_heading);

                tap.reset();
                tap.prime(pose);
                for (int k = 0; k < opt.max_leg_steps; ++k) {
                    const RobotPose next = drive_kinematics(cruise, pose, opt.dt, opt.drive);
                    if (!scene.arena.contains(next.x, next.y)) {
                        fail(ErrorKind::InvalidArgument, "record_dataset: recording " + std::to_string(r + 1) +
                                                             " left the arena at frame " + std::to_string(st.samples));
                    }
                    if (collision(scene, next)) {
                        ++st.collisions;
                        break;
                    }
                    pose = next;
                    const LabeledSample s = tap.sample(pose);
                    emit(s);
                    if (*s.distance_cm < trigger) break;
                    // a ray that slides past the panel edge must not walk the robot into it
                    if (point_segment_distance({pose.x, pose.y}, target, target) < 0.35) break;
                }
                ++st.legs;
            }
        }
        if (stats) stats->push_back(st);
    }
    return ds;
}

}  // namespace ofnav::sim
