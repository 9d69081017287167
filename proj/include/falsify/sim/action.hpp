#pragma once

#include <algorithm>
#include <cmath>

#include "falsify/limits.hpp"

namespace falsify {

// Adversary action: walking speed and turning rate, clamped on construction.
struct HumanAction {
    double speed = 0.0;      // m/s, [0, 1.5]
    double turn_rate = 0.0;  // rad/s, [-pi/2, pi/2]

    HumanAction() = default;
    HumanAction(double s, double t)
        : speed(std::clamp(s, 0.0, limits::kHumanMaxSpeed)),
          turn_rate(std::clamp(t, -M_PI / 2.0, M_PI / 2.0)) {}

    static constexpr double speed_min() { return 0.0; }
    static constexpr double speed_max() { return limits::kHumanMaxSpeed; }
    static double turn_min() { return -M_PI / 2.0; }
    static double turn_max() { return M_PI / 2.0; }
};

}  // namespace falsify
