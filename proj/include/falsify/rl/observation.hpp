#pragma once

#include <cmath>
#include <vector>

#include "falsify/limits.hpp"
#include "falsify/sim/world.hpp"

namespace falsify {

inline constexpr int kObservationDim = 9;

// Agent observation: robot state relative to the human body frame, all
// components normalized to roughly [-1, 1].
inline std::vector<double> encode_observation(const WorldState& state) {
    const double room = 12.0;
    Vec2 rel = state.robot.pose.position() - state.human.pose.position();
    Vec2 local = rel.rotated(-state.human.pose.heading);
    double dh = state.robot.pose.heading - state.human.pose.heading;
    return {
        local.x / room,
        local.y / room,
        std::sin(dh),
        std::cos(dh),
        state.robot.speed / limits::kRobotMaxSpeed,
        state.human.speed / limits::kHumanMaxSpeed,
        human_robot_distance(state.human, state.robot) / room,
        state.scanner_triggered ? 1.0 : 0.0,
        std::max(0.0, limits::kEpisodeTimeLimit - state.time) / limits::kEpisodeTimeLimit,
    };
}

}  // namespace falsify
