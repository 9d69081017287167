#pragma once

namespace falsify::limits {

// Agent and SUT kinematic bounds.
inline constexpr double kHumanMaxSpeed = 1.5;   // m/s
inline constexpr double kRobotMaxSpeed = 1.0;   // m/s
inline constexpr double kRobotMaxTurnRate = 1.0;  // rad/s

// Footprints. The human is a disc, the robot a rectangle aligned with
// its heading (length along heading x width).
inline constexpr double kHumanRadius = 0.25;     // m
inline constexpr double kRobotHalfLength = 0.4;  // m
inline constexpr double kRobotHalfWidth = 0.3;   // m

// Simulation step and episode cap.
inline constexpr double kDefaultDt = 0.1;        // s
inline constexpr double kEpisodeTimeLimit = 30.0;  // s

}  // namespace falsify::limits
