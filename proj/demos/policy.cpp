// Steering policy walk-through: the wheel duties for cruise and both evades,
// and the pose reached by repeating each for one second.

#include <cstdio>

#include "ofnav/ofnav.hpp"

using namespace ofnav;

int main() {
    const struct {
        const char* name;
        VelocityCommand cmd;
    } cases[] = {
        {"cruise", cruise_command()},
        {"evade right", evade_command(SteerKind::EvadeRight)},
        {"evade left", evade_command(SteerKind::EvadeLeft)},
    };
    std::printf("%-12s %8s %8s %8s %8s %8s %8s %9s\n", "command", "|V|", "theta", "left", "right", "x", "y", "heading");
    for (const auto& c : cases) {
        const WheelState w = apply_command(c.cmd);
        RobotPose p;
        for (int i = 0; i < 10; ++i) p = drive_kinematics(w, p, 0.1);
        std::printf("%-12s %8.1f %8.4f %8.1f %8.1f %8.4f %8.4f %9.4f\n", c.name, c.cmd.magnitude_pct, c.cmd.theta,
                    w.left_duty, w.right_duty, p.x, p.y, p.heading);
    }
    const RobotPose after = drive_kinematics(apply_command(evade_command(SteerKind::EvadeRight)), {}, 0.2);
    std::printf("one 200 ms evade turns %.4f rad\n", after.heading);
    return 0;
}
