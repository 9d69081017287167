#pragma once

#include <cstdio>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "falsify/analysis/report.hpp"
#include "falsify/exp/config.hpp"
#include "falsify/testing/problem.hpp"

namespace falsify {

inline constexpr int kLogSchemaVersion = 1;

namespace detail {

// Shortest round-trippable decimal form, stable across platforms.
inline std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace detail

// Episode log writer. One JSON object per line, formatted by hand so that
// identical runs produce byte-identical files.
class LogWriter {
  public:
    // append continues an interrupted run's log; the header is written once.
    LogWriter(const std::string& path, const ExperimentConfig& cfg, uint64_t seed,
              bool append = false)
        : os_(path, append ? std::ios::app : std::ios::out) {
        if (!os_) throw std::runtime_error("cannot open log for writing: " + path);
        if (append) return;
        os_ << "{\"schema\":\"falsify-episode-log\",\"version\":" << kLogSchemaVersion
            << ",\"config_hash\":\"" << config_hash(cfg) << "\",\"scenario\":\""
            << to_string(cfg.scenario) << "\",\"scanner\":\"" << to_string(cfg.scanner)
            << "\",\"algorithm\":\"" << to_string(cfg.algorithm) << "\",\"seed\":" << seed
            << "}\n";
    }

    void step(long ep, long step_idx, const WorldState& s, const HumanAction& a,
              double risk_score, double reward, Verdict verdict) {
        using detail::fmt_double;
        os_ << "{\"ep\":" << ep << ",\"step\":" << step_idx
            << ",\"t\":" << fmt_double(s.time)
            << ",\"hx\":" << fmt_double(s.human.pose.x)
            << ",\"hy\":" << fmt_double(s.human.pose.y)
            << ",\"hh\":" << fmt_double(s.human.pose.heading)
            << ",\"hv\":" << fmt_double(s.human.speed)
            << ",\"rx\":" << fmt_double(s.robot.pose.x)
            << ",\"ry\":" << fmt_double(s.robot.pose.y)
            << ",\"rh\":" << fmt_double(s.robot.pose.heading)
            << ",\"rv\":" << fmt_double(s.robot.speed)
            << ",\"mode\":\"" << to_string(s.robot.mode)
            << "\",\"scan\":" << (s.scanner_triggered ? 1 : 0)
            << ",\"infield\":" << fmt_double(s.in_field_accumulated)
            << ",\"ax\":" << fmt_double(a.speed)
            << ",\"aw\":" << fmt_double(a.turn_rate)
            << ",\"risk\":" << fmt_double(risk_score)
            << ",\"reward\":" << fmt_double(reward)
            << ",\"verdict\":\"" << to_string(verdict) << "\"}\n";
    }

    void episode_end(long ep, TerminationReason term, long steps, double in_field,
                     long cycles, const std::optional<ContactInfo>& contact,
                     Verdict final_verdict) {
        os_ << "{\"ep\":" << ep << ",\"end\":\"" << to_string(term)
            << "\",\"steps\":" << steps
            << ",\"infield\":" << detail::fmt_double(in_field)
            << ",\"cycles\":" << cycles;
        if (contact && final_verdict != Verdict::Safe) {
            os_ << ",\"sector\":\"" << to_string(contact->robot_sector)
                << "\",\"impact_rv\":" << detail::fmt_double(contact->robot_speed_at_impact)
                << ",\"impact_hv\":" << detail::fmt_double(contact->human_speed_at_impact)
                << ",\"impact_scan\":" << (contact->scanner_triggered_at_impact ? 1 : 0);
        }
        os_ << "}\n";
    }

    void flush() { os_.flush(); }

  private:
    std::ofstream os_;
};

struct EpisodeRecord {
    long ep = 0;
    TerminationReason termination = TerminationReason::Timeout30s;
    long steps = 0;
    double in_field = 0.0;
    long cycles = 0;
    std::optional<ContactInfo> contact;  // sector/speeds/scan only
};

struct RunLog {
    std::string config_hash;
    std::string scenario;
    std::string scanner;
    std::string algorithm;
    uint64_t seed = 0;
    std::vector<EpisodeRecord> episodes;
};

inline TerminationReason parse_termination(const std::string& s) {
    if (s == "goal_reached") return TerminationReason::GoalReached;
    if (s == "unsafe_collision") return TerminationReason::UnsafeCollision;
    if (s == "excluded_collision") return TerminationReason::ExcludedCollision;
    if (s == "timeout_30s") return TerminationReason::Timeout30s;
    if (s == "scanner_stall") return TerminationReason::ScannerStall;
    throw std::invalid_argument("unknown termination reason: " + s);
}

inline ContactSector parse_sector(const std::string& s) {
    if (s == "front") return ContactSector::Front;
    if (s == "left") return ContactSector::Left;
    if (s == "right") return ContactSector::Right;
    if (s == "rear") return ContactSector::Rear;
    throw std::invalid_argument("unknown sector: " + s);
}

// Reads a run log, tolerating a truncated tail (crashed runs keep a parseable
// prefix; a final partial line is dropped).
inline RunLog read_run_log(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open log: " + path);
    RunLog log;
    std::string line;
    bool first = true;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error&) {
            break;  // truncated tail
        }
        if (first) {
            if (j.value("schema", "") != "falsify-episode-log") {
                throw std::runtime_error("not an episode log: " + path);
            }
            log.config_hash = j.at("config_hash").get<std::string>();
            log.scenario = j.at("scenario").get<std::string>();
            log.scanner = j.at("scanner").get<std::string>();
            log.algorithm = j.at("algorithm").get<std::string>();
            log.seed = j.at("seed").get<uint64_t>();
            first = false;
            continue;
        }
        if (!j.contains("end")) continue;  // step record
        EpisodeRecord r;
        r.ep = j.at("ep").get<long>();
        r.termination = parse_termination(j.at("end").get<std::string>());
        r.steps = j.at("steps").get<long>();
        r.in_field = j.at("infield").get<double>();
        r.cycles = j.at("cycles").get<long>();
        if (j.contains("sector")) {
            ContactInfo c;
            c.robot_sector = parse_sector(j.at("sector").get<std::string>());
            c.robot_speed_at_impact = j.at("impact_rv").get<double>();
            c.human_speed_at_impact = j.at("impact_hv").get<double>();
            c.scanner_triggered_at_impact = j.at("impact_scan").get<int>() != 0;
            r.contact = c;
        }
        log.episodes.push_back(r);
    }
    return log;
}

}  // namespace falsify
