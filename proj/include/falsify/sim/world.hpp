#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "falsify/geometry.hpp"
#include "falsify/limits.hpp"
#include "falsify/sim/action.hpp"

namespace falsify {

struct AgentState {
    Pose pose;
    double speed = 0.0;  // m/s, [0, kHumanMaxSpeed]
};

enum class RobotMode { Driving, ScannerStopped, GoalReached };

struct RobotState {
    Pose pose;
    double speed = 0.0;      // m/s, [0, kRobotMaxSpeed]
    double turn_rate = 0.0;  // rad/s
    RobotMode mode = RobotMode::Driving;
    Pose goal;
    // Continuous scanner-clear time while stopped, drives the restart debounce.
    double clear_timer = 0.0;
};

enum class ContactSector { Front, Left, Right, Rear };

struct ContactInfo {
    Vec2 point;
    ContactSector robot_sector = ContactSector::Front;
    Vec2 human_approach;  // unit vector
    double robot_speed_at_impact = 0.0;
    double human_speed_at_impact = 0.0;
    bool scanner_triggered_at_impact = false;
};

struct WorldState {
    double time = 0.0;
    AgentState human;
    RobotState robot;
    std::optional<ContactInfo> contact;
    bool scanner_triggered = false;
    double in_field_accumulated = 0.0;  // s, resets at episode start
};

struct StaticMap {
    Rect bounds{0.0, 0.0, 12.0, 12.0};
    std::vector<Segment> walls;
};

enum class ScannerSetting { None, R1_25, R2_0 };

// Laser scanner field: two angular sectors around the robot heading.
// Front covers bearings [-75 deg, +75 deg], rear covers [105 deg, 255 deg],
// leaving two 30 deg lateral gaps.
struct ScannerConfig {
    ScannerSetting setting = ScannerSetting::None;
    double radius = 0.0;  // m
    double front_half_angle = 75.0 * M_PI / 180.0;
    double rear_gap_angle = 105.0 * M_PI / 180.0;  // rear sector: |bearing| >= this

    static ScannerConfig make(ScannerSetting s) {
        ScannerConfig c;
        c.setting = s;
        switch (s) {
            case ScannerSetting::None: c.radius = 0.0; break;
            case ScannerSetting::R1_25: c.radius = 1.25; break;
            case ScannerSetting::R2_0: c.radius = 2.0; break;
        }
        return c;
    }
};

// Exact constant-turn-rate arc update; straight line below the rate threshold.
inline Pose integrate_unicycle(const Pose& pose, double speed, double turn_rate, double dt) {
    Pose out;
    if (std::abs(turn_rate) > 1e-9) {
        double r = speed / turn_rate;
        double h1 = pose.heading + turn_rate * dt;
        out.x = pose.x + r * (std::sin(h1) - std::sin(pose.heading));
        out.y = pose.y + r * (std::cos(pose.heading) - std::cos(h1));
        out.heading = normalize_angle(h1);
    } else {
        out.x = pose.x + speed * dt * std::cos(pose.heading);
        out.y = pose.y + speed * dt * std::sin(pose.heading);
        out.heading = normalize_angle(pose.heading);
    }
    return out;
}

// Human center position expressed in the robot body frame.
inline Vec2 human_in_robot_frame(const AgentState& human, const RobotState& robot) {
    Vec2 rel = human.pose.position() - robot.pose.position();
    return rel.rotated(-robot.pose.heading);
}

// Minimum distance between the human disc boundary and the robot rectangle; 0 on overlap.
inline double human_robot_distance(const AgentState& human, const RobotState& robot) {
    Vec2 local = human_in_robot_frame(human, robot);
    double d = point_box_distance(local, limits::kRobotHalfLength, limits::kRobotHalfWidth);
    return std::max(0.0, d - limits::kHumanRadius);
}

inline ContactSector sector_from_bearing(double bearing) {
    double deg = std::abs(bearing) * 180.0 / M_PI;
    if (deg <= 45.0) return ContactSector::Front;
    if (deg >= 135.0) return ContactSector::Rear;
    return bearing > 0.0 ? ContactSector::Left : ContactSector::Right;
}

inline std::optional<ContactInfo> detect_contact(const AgentState& human, const RobotState& robot) {
    Vec2 local = human_in_robot_frame(human, robot);
    Vec2 closest = closest_point_on_box(local, limits::kRobotHalfLength, limits::kRobotHalfWidth);
    if ((local - closest).norm() > limits::kHumanRadius) return std::nullopt;

    ContactInfo c;
    c.point = robot.pose.position() + closest.rotated(robot.pose.heading);
    double bearing = std::atan2(closest.y, closest.x);
    c.robot_sector = sector_from_bearing(bearing);
    if (human.speed > 1e-9) {
        c.human_approach = human.pose.heading_vec();
    } else {
        c.human_approach = (c.point - human.pose.position()).normalized();
    }
    c.robot_speed_at_impact = robot.speed;
    c.human_speed_at_impact = human.speed;
    return c;
}

inline bool human_in_scanner_field(const WorldState& state, const ScannerConfig& scanner) {
    if (scanner.setting == ScannerSetting::None) return false;
    Vec2 local = human_in_robot_frame(state.human, state.robot);
    if (local.norm() > scanner.radius) return false;
    double bearing = std::abs(std::atan2(local.y, local.x));
    return bearing <= scanner.front_half_angle || bearing >= scanner.rear_gap_angle;
}

// Clearance the human footprint keeps from walls and bounds.
inline double human_map_clearance(const Vec2& p, const StaticMap& map) {
    double c = std::min({p.x - map.bounds.x_min, map.bounds.x_max - p.x,
                         p.y - map.bounds.y_min, map.bounds.y_max - p.y});
    for (const auto& w : map.walls) c = std::min(c, point_segment_distance(p, w));
    return c - limits::kHumanRadius;
}

// True iff executing the action for one step keeps the human clear of walls and bounds.
inline bool mask_static_collision(const WorldState& state, const HumanAction& action,
                                  const StaticMap& map, double dt) {
    Pose next = integrate_unicycle(state.human.pose, action.speed, action.turn_rate, dt);
    return human_map_clearance(next.position(), map) >= 0.0;
}

// Pushes a human position back to legal clearance. Bounds clamp first, then
// wall push-out along the closest-point normal; a few rounds settle corners.
inline Vec2 resolve_human_walls(Vec2 p, const StaticMap& map) {
    const double r = limits::kHumanRadius;
    for (int iter = 0; iter < 4; ++iter) {
        p.x = std::clamp(p.x, map.bounds.x_min + r, map.bounds.x_max - r);
        p.y = std::clamp(p.y, map.bounds.y_min + r, map.bounds.y_max - r);
        bool moved = false;
        for (const auto& w : map.walls) {
            Vec2 d = w.b - w.a;
            double len2 = std::max(d.dot(d), 1e-18);
            double t = std::clamp((p - w.a).dot(d) / len2, 0.0, 1.0);
            Vec2 cp = w.a + d * t;
            Vec2 away = p - cp;
            double dist = away.norm();
            if (dist < r) {
                Vec2 n = dist > 1e-9 ? away * (1.0 / dist) : Vec2{0.0, 1.0};
                p = cp + n * r;
                moved = true;
            }
        }
        if (!moved) break;
    }
    return p;
}

// One simulation step: integrate both bodies, slide the human along walls,
// recompute contact and scanner status, advance the clock.
inline WorldState step_world(const WorldState& state, const HumanAction& action,
                             double robot_speed_cmd, double robot_turn_cmd,
                             const StaticMap& map, const ScannerConfig& scanner, double dt) {
    if (!std::isfinite(action.speed) || !std::isfinite(action.turn_rate)) {
        throw std::invalid_argument("step_world: non-finite human action");
    }

    WorldState next = state;
    next.time = state.time + dt;

    // Human: integrate, then resolve wall penetration (slide, never terminate).
    double h_speed = std::clamp(action.speed, 0.0, limits::kHumanMaxSpeed);
    Pose h_pose = integrate_unicycle(state.human.pose, h_speed, action.turn_rate, dt);
    Vec2 h_pos = resolve_human_walls(h_pose.position(), map);
    next.human.pose = Pose{h_pos.x, h_pos.y, h_pose.heading};
    next.human.speed = h_speed;

    // Robot: command already passed through the safety override.
    double r_speed = std::clamp(robot_speed_cmd, 0.0, limits::kRobotMaxSpeed);
    double r_turn = std::clamp(robot_turn_cmd, -limits::kRobotMaxTurnRate, limits::kRobotMaxTurnRate);
    if (next.robot.mode != RobotMode::Driving) r_speed = 0.0;
    next.robot.pose = integrate_unicycle(state.robot.pose, r_speed, r_turn, dt);
    next.robot.speed = r_speed;
    next.robot.turn_rate = r_turn;

    next.contact = detect_contact(next.human, next.robot);
    next.scanner_triggered = human_in_scanner_field(next, scanner);
    if (next.contact) next.contact->scanner_triggered_at_impact = next.scanner_triggered;
    if (next.scanner_triggered) next.in_field_accumulated += dt;
    if (next.robot.mode == RobotMode::ScannerStopped) {
        next.robot.clear_timer = next.scanner_triggered ? 0.0 : next.robot.clear_timer + dt;
    }
    return next;
}

}  // namespace falsify
