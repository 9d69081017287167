#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "falsify/geometry.hpp"
#include "falsify/limits.hpp"
#include "falsify/sim/world.hpp"

namespace falsify {

struct RobotCommand {
    double speed = 0.0;      // m/s, [0, kRobotMaxSpeed]
    double turn_rate = 0.0;  // rad/s, [-1, 1]
};

struct ControllerParams {
    int horizon = 20;  // steps
    std::vector<double> candidate_speeds{0.0, 0.25, 0.5, 0.75, 1.0};
    std::vector<double> candidate_turns{-1.0, -0.5, -0.2, 0.0, 0.2, 0.5, 1.0};
    double goal_weight = 1.0;
    double human_weight = 2.0;
    double wall_weight = 10.0;
    double effort_weight = 0.1;
    double restart_clear_time = 0.5;  // s of continuous field clearance before restart
    double goal_radius = 0.2;         // m
    double wall_margin = 0.2;         // m, soft clearance band outside the footprint
};

struct HumanPrediction {
    std::vector<Vec2> positions;  // one per horizon step
};

// Constant-velocity extrapolation of the human, clipped to map bounds.
inline HumanPrediction predict_human(const AgentState& human, int horizon, double dt,
                                     const StaticMap& map) {
    HumanPrediction pred;
    pred.positions.reserve(static_cast<size_t>(horizon));
    Vec2 vel = human.pose.heading_vec() * human.speed;
    Vec2 p = human.pose.position();
    const double r = limits::kHumanRadius;
    Rect inner{map.bounds.x_min + r, map.bounds.y_min + r,
               map.bounds.x_max - r, map.bounds.y_max - r};
    for (int i = 0; i < horizon; ++i) {
        p = inner.clamp(p + vel * dt);
        pred.positions.push_back(p);
    }
    return pred;
}

// Robot circumradius, used for the wall clearance of rolled-out candidates.
inline double robot_circumradius() {
    return std::hypot(limits::kRobotHalfLength, limits::kRobotHalfWidth);
}

inline double robot_wall_clearance(const Vec2& p, const StaticMap& map) {
    double c = std::min({p.x - map.bounds.x_min, map.bounds.x_max - p.x,
                         p.y - map.bounds.y_min, map.bounds.y_max - p.y});
    for (const auto& w : map.walls) c = std::min(c, point_segment_distance(p, w));
    return c - robot_circumradius();
}

// Receding-horizon sampling controller: rolls each (speed, turn) primitive out
// over the horizon against the human prediction and picks the cheapest. The
// rollout freezes once it enters the goal radius (the robot stops there), so
// slow approach candidates are not penalized for overshooting; without this
// the planner stalls just outside the goal radius. Ties break toward the
// lower candidate index. Sets GoalReached at the goal.
inline RobotCommand plan_step(WorldState& state, const HumanPrediction& pred,
                              const ControllerParams& params, const StaticMap& map,
                              double dt) {
    const RobotState& robot = state.robot;
    Vec2 goal{robot.goal.x, robot.goal.y};

    if ((robot.pose.position() - goal).norm() < params.goal_radius) {
        state.robot.mode = RobotMode::GoalReached;
        return RobotCommand{};
    }

    double best_cost = std::numeric_limits<double>::infinity();
    RobotCommand best{};  // zero command if every candidate hits a wall
    for (double speed : params.candidate_speeds) {
        for (double turn : params.candidate_turns) {
            Pose p = robot.pose;
            double cost = params.effort_weight *
                          (std::abs(speed - robot.speed) + std::abs(turn - robot.turn_rate));
            bool feasible = true;
            bool at_goal = false;
            for (int i = 0; i < params.horizon; ++i) {
                if (!at_goal) p = integrate_unicycle(p, speed, turn, dt);
                at_goal = at_goal || (p.position() - goal).norm() < params.goal_radius;
                double wall = robot_wall_clearance(p.position(), map);
                if (wall < 0.0) {
                    feasible = false;
                    break;
                }
                cost += params.wall_weight * std::max(0.0, params.wall_margin - wall);
                size_t hi = std::min(static_cast<size_t>(i), pred.positions.size() - 1);
                double dh = (p.position() - pred.positions[hi]).norm();
                cost += params.human_weight * std::exp(-dh);
            }
            if (!feasible) continue;
            cost += params.goal_weight * (p.position() - goal).norm();
            if (cost < best_cost) {
                best_cost = cost;
                best = RobotCommand{speed, turn};
            }
        }
    }
    return best;
}

// Scanner stop override. A triggered field zeroes the command immediately;
// restart requires restart_clear_time of continuous clearance. The clearance
// timer itself advances in step_world, which keeps this function idempotent.
inline RobotCommand safety_override(const RobotCommand& command, WorldState& state,
                                    const ScannerConfig& scanner,
                                    const ControllerParams& params, double dt) {
    if (state.robot.mode == RobotMode::GoalReached) return RobotCommand{};
    if (human_in_scanner_field(state, scanner)) {
        state.robot.mode = RobotMode::ScannerStopped;
        state.robot.clear_timer = 0.0;
        return RobotCommand{};
    }
    if (state.robot.mode == RobotMode::ScannerStopped) {
        if (state.robot.clear_timer >= params.restart_clear_time) {
            state.robot.mode = RobotMode::Driving;
            state.robot.clear_timer = 0.0;
            return command;
        }
        return RobotCommand{};
    }
    return command;
}

}  // namespace falsify
