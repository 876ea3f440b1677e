// Drives straight at a single panel and prints, per frame, the range, the
// label it would get and how the flow splits between the image halves.
// Writes the first and last frame pair as PGM files into the working directory.

#include <cstdio>
#include <numbers>

#include "ofnav/ofnav.hpp"

using namespace ofnav;

int main() {
    sim::Scene scene;
    scene.arena = {-3.0, -2.0, 3.0, 2.0};
    scene.obstacles.push_back({1.0, 0.12, std::numbers::pi, 0.5, 0.35, 42});

    const sim::CameraModel cam;
    const FlowExtractor flow(PipelineConfig{}, cam.width, cam.height);
    const WheelState cruise = apply_command(cruise_command());

    RobotPose pose{-1.5, 0.0, 0.0};
    GrayImage prev = flow.prepare(sim::render(scene, pose, cam));
    pnm::save_pgm("approach_first.pgm", sim::render(scene, pose, cam));

    std::printf("%6s %8s %6s %8s %8s %s\n", "frame", "range", "label", "left", "right", "calmer");
    for (int k = 0; k < 400; ++k) {
        const RobotPose next = drive_kinematics(cruise, pose, 0.1);
        if (sim::collision(scene, next)) break;
        pose = next;
        const GrayImage frame = sim::render(scene, pose, cam);
        GrayImage cur = flow.prepare(frame);
        const FlowField f = flow.track(prev, cur);
        prev = std::move(cur);
        const double range = sim::range_sensor(scene, pose, cam);
        const HalfMeans m = half_means(f, cam.width);
        if (k % 10 == 0) {
            std::printf("%6d %8.1f %6d %8.3f %8.3f %s\n", k, range, to_int(label_from_range(range)), m.left, m.right,
                        m.left < m.right ? "left" : "right");
        }
        if (range < 15.0) {
            pnm::save_pgm("approach_last.pgm", frame);
            break;
        }
    }
    return 0;
}
