#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "falsify/sim/world.hpp"

namespace falsify {

enum class Scenario { Crossing, HeadOn, Overtaking };

inline const char* to_string(Scenario s) {
    switch (s) {
        case Scenario::Crossing: return "crossing";
        case Scenario::HeadOn: return "headon";
        case Scenario::Overtaking: return "overtaking";
    }
    return "?";
}

inline const char* to_string(ScannerSetting s) {
    switch (s) {
        case ScannerSetting::None: return "Lnone";
        case ScannerSetting::R1_25: return "L1.25m";
        case ScannerSetting::R2_0: return "L2m";
    }
    return "?";
}

struct ScenarioConfig {
    Scenario name = Scenario::Crossing;
    Pose human_start;
    Pose robot_start;
    Pose robot_goal;
    std::string map_id = "room_a";
};

// 12 m x 12 m room with two interior wall stubs away from the main paths.
inline StaticMap make_map(const std::string& map_id) {
    if (map_id != "room_a") throw std::invalid_argument("unknown map id: " + map_id);
    StaticMap map;
    map.bounds = Rect{0.0, 0.0, 12.0, 12.0};
    map.walls = {Segment{{3.0, 0.0}, {3.0, 2.0}}, Segment{{9.0, 10.0}, {9.0, 12.0}}};
    return map;
}

// Robot always drives the room's east-west corridor; the human start encodes
// the scenario geometry (perpendicular / facing / ahead-same-direction).
inline ScenarioConfig make_scenario(Scenario s) {
    ScenarioConfig c;
    c.name = s;
    c.robot_start = Pose{2.0, 6.0, 0.0};
    c.robot_goal = Pose{10.0, 6.0, 0.0};
    switch (s) {
        case Scenario::Crossing:
            c.human_start = Pose{6.0, 3.0, M_PI / 2.0};
            break;
        case Scenario::HeadOn:
            c.human_start = Pose{10.0, 6.0, M_PI};
            break;
        case Scenario::Overtaking:
            c.human_start = Pose{4.0, 6.0, 0.0};
            break;
    }
    return c;
}

inline WorldState initial_state(const ScenarioConfig& sc) {
    WorldState w;
    w.human.pose = sc.human_start;
    w.human.speed = 0.0;
    w.robot.pose = sc.robot_start;
    w.robot.goal = sc.robot_goal;
    w.robot.mode = RobotMode::Driving;
    return w;
}

}  // namespace falsify
