#pragma once

#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "falsify/limits.hpp"
#include "falsify/sim/world.hpp"
#include "falsify/testing/problem.hpp"

namespace falsify {

// Diversity taxonomy: impact direction x robot speed band, with every
// scanner-triggered impact collapsed into a single ninth class.
struct CollisionClass {
    ContactSector direction = ContactSector::Front;
    bool fast = false;  // robot speed >= 0.5 * v_max at impact
    bool scanner_involved = false;

    // 0..7 without scanner involvement, 8 for the scanner class.
    int id() const {
        if (scanner_involved) return 8;
        return static_cast<int>(direction) * 2 + (fast ? 1 : 0);
    }

    std::string label() const {
        if (scanner_involved) return "scanner";
        return std::string(to_string(direction)) + (fast ? "_fast" : "_slow");
    }
};

inline constexpr double kSpeedBandFraction = 0.5;

inline CollisionClass classify_collision(const ContactInfo& record, Verdict verdict) {
    if (verdict != Verdict::Unsafe) {
        throw std::invalid_argument("classify_collision: record is not an unsafe collision");
    }
    CollisionClass c;
    c.direction = record.robot_sector;
    c.fast = record.robot_speed_at_impact >= kSpeedBandFraction * limits::kRobotMaxSpeed;
    c.scanner_involved = record.scanner_triggered_at_impact;
    return c;
}

inline int class_count_for_setting(ScannerSetting s) {
    return s == ScannerSetting::None ? 8 : 9;
}

struct RunSummary {
    std::string scenario;
    std::string scanner;
    std::string algorithm;
    uint64_t seed = 0;
    long episodes = 0;
    long unsafe_collisions = 0;
    long excluded_collisions = 0;
    std::set<int> classes_found;
    double runtime_seconds = 0.0;
    long stall_terminations = 0;
    double mean_in_field_time = 0.0;
};

struct ConfigAggregate {
    std::string scenario;
    std::string scanner;
    std::string algorithm;
    int seeds = 0;
    double mean_unsafe = 0.0;
    double mean_excluded = 0.0;
    double mean_runtime = 0.0;
    std::set<int> classes_union;
};

inline std::string config_key(const RunSummary& s) {
    return s.scenario + "/" + s.scanner + "/" + s.algorithm;
}

// Per-config means over seeds plus the union of collision classes found.
inline std::map<std::string, ConfigAggregate> aggregate_runs(
        const std::vector<RunSummary>& summaries) {
    std::map<std::string, ConfigAggregate> out;
    for (const auto& s : summaries) {
        auto& a = out[config_key(s)];
        a.scenario = s.scenario;
        a.scanner = s.scanner;
        a.algorithm = s.algorithm;
        a.seeds += 1;
        a.mean_unsafe += s.unsafe_collisions;
        a.mean_excluded += s.excluded_collisions;
        a.mean_runtime += s.runtime_seconds;
        a.classes_union.insert(s.classes_found.begin(), s.classes_found.end());
    }
    for (auto& [k, a] : out) {
        a.mean_unsafe /= a.seeds;
        a.mean_excluded /= a.seeds;
        a.mean_runtime /= a.seeds;
    }
    return out;
}

// Per-episode figures feeding the reward-hacking diagnostics.
struct EpisodeMetrics {
    TerminationReason termination = TerminationReason::Timeout30s;
    long steps = 0;
    double in_field_time = 0.0;
    long stop_restart_cycles = 0;  // ScannerStopped -> Driving transitions
    double wall_time_seconds = 0.0;
};

inline long count_stop_restart_cycles(const std::vector<RobotMode>& modes) {
    long cycles = 0;
    for (size_t i = 1; i < modes.size(); ++i) {
        if (modes[i - 1] == RobotMode::ScannerStopped && modes[i] == RobotMode::Driving) {
            ++cycles;
        }
    }
    return cycles;
}

struct HackingWindow {
    long first_episode = 0;
    long last_episode = 0;  // inclusive
    double timeout_or_stall_fraction = 0.0;
    double mean_in_field_time = 0.0;
    double mean_episode_steps = 0.0;
    double mean_cycles = 0.0;
};

// Splits the episode sequence into equal training windows and reports the
// hacking signature per window.
inline std::vector<HackingWindow> reward_hacking_report(
        const std::vector<EpisodeMetrics>& episodes, int windows = 4) {
    std::vector<HackingWindow> out;
    if (episodes.empty() || windows <= 0) return out;
    size_t n = episodes.size();
    for (int w = 0; w < windows; ++w) {
        size_t lo = n * w / windows;
        size_t hi = n * (w + 1) / windows;
        if (lo >= hi) continue;
        HackingWindow hw;
        hw.first_episode = static_cast<long>(lo);
        hw.last_episode = static_cast<long>(hi) - 1;
        long hacked = 0;
        for (size_t i = lo; i < hi; ++i) {
            const auto& e = episodes[i];
            if (e.termination == TerminationReason::Timeout30s ||
                e.termination == TerminationReason::ScannerStall) {
                ++hacked;
            }
            hw.mean_in_field_time += e.in_field_time;
            hw.mean_episode_steps += e.steps;
            hw.mean_cycles += e.stop_restart_cycles;
        }
        double cnt = static_cast<double>(hi - lo);
        hw.timeout_or_stall_fraction = hacked / cnt;
        hw.mean_in_field_time /= cnt;
        hw.mean_episode_steps /= cnt;
        hw.mean_cycles /= cnt;
        out.push_back(hw);
    }
    return out;
}

// All CSV output goes through this: 6 significant digits, locale-free.
inline std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

}  // namespace falsify
