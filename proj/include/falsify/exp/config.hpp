#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "falsify/exp/scenario.hpp"
#include "falsify/rl/ppo.hpp"
#include "falsify/sut/controller.hpp"
#include "falsify/testing/problem.hpp"

namespace falsify {

enum class Algorithm { RL_acc, RL_max, RS };

inline const char* to_string(Algorithm a) {
    switch (a) {
        case Algorithm::RL_acc: return "RLacc";
        case Algorithm::RL_max: return "RLmax";
        case Algorithm::RS: return "RS";
    }
    return "?";
}

struct ExperimentConfig {
    Scenario scenario = Scenario::Crossing;
    ScannerSetting scanner = ScannerSetting::R1_25;
    Algorithm algorithm = Algorithm::RL_max;
    std::vector<uint64_t> seeds{1, 2, 3};
    long episode_cap = 20000;
    double dt = limits::kDefaultDt;
    std::string map_id = "room_a";
    TerminationSettings termination;
    ControllerParams controller;
    PpoHyperparams ppo;
    long checkpoint_every = 500;  // episodes
    int workers = 1;
    std::string out_dir = "out";
};

inline Scenario parse_scenario(const std::string& s) {
    if (s == "crossing") return Scenario::Crossing;
    if (s == "headon" || s == "head-on") return Scenario::HeadOn;
    if (s == "overtaking") return Scenario::Overtaking;
    throw std::invalid_argument("unknown scenario: " + s);
}

inline ScannerSetting parse_scanner(const std::string& s) {
    if (s == "Lnone" || s == "none") return ScannerSetting::None;
    if (s == "L1.25m" || s == "1.25") return ScannerSetting::R1_25;
    if (s == "L2m" || s == "2.0" || s == "2") return ScannerSetting::R2_0;
    throw std::invalid_argument("unknown scanner setting: " + s);
}

inline Algorithm parse_algorithm(const std::string& s) {
    if (s == "RLacc" || s == "RL_acc") return Algorithm::RL_acc;
    if (s == "RLmax" || s == "RL_max") return Algorithm::RL_max;
    if (s == "RS" || s == "random") return Algorithm::RS;
    throw std::invalid_argument("unknown algorithm: " + s);
}

namespace detail {

inline std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

inline bool parse_bool(const std::string& v) {
    if (v == "on" || v == "true" || v == "1" || v == "yes") return true;
    if (v == "off" || v == "false" || v == "0" || v == "no") return false;
    throw std::invalid_argument("expected boolean, got: " + v);
}

inline std::vector<uint64_t> parse_seed_list(const std::string& v) {
    std::vector<uint64_t> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(std::stoull(item));
    }
    return out;
}

inline std::vector<double> parse_double_list(const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(std::stod(item));
    }
    return out;
}

}  // namespace detail

// Flat INI-style config: [section] headers, key = value lines, # comments.
inline std::map<std::string, std::string> read_key_values(std::istream& is) {
    std::map<std::string, std::string> kv;
    std::string line, section;
    while (std::getline(is, line)) {
        line = detail::trim(line);
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;
        if (line.front() == '[' && line.back() == ']') {
            section = detail::trim(line.substr(1, line.size() - 2));
            continue;
        }
        size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("config: expected key = value, got: " + line);
        }
        std::string key = detail::trim(line.substr(0, eq));
        std::string val = detail::trim(line.substr(eq + 1));
        kv[section.empty() ? key : section + "." + key] = val;
    }
    return kv;
}

inline void apply_config_entries(ExperimentConfig& c,
                                 const std::map<std::string, std::string>& kv) {
    using detail::parse_bool;
    for (const auto& [key, v] : kv) {
        if (key == "experiment.scenario") c.scenario = parse_scenario(v);
        else if (key == "experiment.scanner") c.scanner = parse_scanner(v);
        else if (key == "experiment.algorithm") c.algorithm = parse_algorithm(v);
        else if (key == "experiment.seeds") c.seeds = detail::parse_seed_list(v);
        else if (key == "experiment.episodes") c.episode_cap = std::stol(v);
        else if (key == "experiment.dt") c.dt = std::stod(v);
        else if (key == "experiment.map") c.map_id = v;
        else if (key == "experiment.checkpoint_every") c.checkpoint_every = std::stol(v);
        else if (key == "experiment.workers") c.workers = std::stoi(v);
        else if (key == "experiment.out") c.out_dir = v;
        else if (key == "termination.anti_stall") c.termination.anti_stall = parse_bool(v);
        else if (key == "termination.stall_limit") c.termination.stall_limit = std::stod(v);
        else if (key == "termination.time_limit") c.termination.time_limit = std::stod(v);
        else if (key == "controller.horizon") c.controller.horizon = std::stoi(v);
        else if (key == "controller.candidate_speeds")
            c.controller.candidate_speeds = detail::parse_double_list(v);
        else if (key == "controller.candidate_turns")
            c.controller.candidate_turns = detail::parse_double_list(v);
        else if (key == "controller.goal_weight") c.controller.goal_weight = std::stod(v);
        else if (key == "controller.human_weight") c.controller.human_weight = std::stod(v);
        else if (key == "controller.wall_weight") c.controller.wall_weight = std::stod(v);
        else if (key == "controller.effort_weight") c.controller.effort_weight = std::stod(v);
        else if (key == "controller.restart_clear_time")
            c.controller.restart_clear_time = std::stod(v);
        else if (key == "controller.goal_radius") c.controller.goal_radius = std::stod(v);
        else if (key == "controller.wall_margin") c.controller.wall_margin = std::stod(v);
        else if (key == "ppo.gamma") c.ppo.gamma = std::stod(v);
        else if (key == "ppo.gae_lambda") c.ppo.gae_lambda = std::stod(v);
        else if (key == "ppo.clip_epsilon") c.ppo.clip_epsilon = std::stod(v);
        else if (key == "ppo.learning_rate") c.ppo.learning_rate = std::stod(v);
        else if (key == "ppo.epochs") c.ppo.epochs = std::stoi(v);
        else if (key == "ppo.batch_size") c.ppo.batch_size = std::stoi(v);
        else if (key == "ppo.minibatch_size") c.ppo.minibatch_size = std::stoi(v);
        else if (key == "ppo.entropy_coef") c.ppo.entropy_coef = std::stod(v);
        else if (key == "ppo.value_coef") c.ppo.value_coef = std::stod(v);
        else if (key == "ppo.max_grad_norm") c.ppo.max_grad_norm = std::stod(v);
        else throw std::invalid_argument("config: unknown key: " + key);
    }
}

inline ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open config file: " + path);
    ExperimentConfig c;
    apply_config_entries(c, read_key_values(is));
    return c;
}

inline void validate_config(const ExperimentConfig& c) {
    if (c.seeds.empty()) throw std::invalid_argument("config: seed list is empty");
    if (c.episode_cap <= 0) throw std::invalid_argument("config: episode cap must be positive");
    if (c.dt <= 0.0) throw std::invalid_argument("config: dt must be positive");
    if (c.controller.horizon < 1) throw std::invalid_argument("config: horizon must be >= 1");
    if (c.controller.goal_weight < 0 || c.controller.human_weight < 0 ||
        c.controller.wall_weight < 0 || c.controller.effort_weight < 0) {
        throw std::invalid_argument("config: controller weights must be nonnegative");
    }
    bool has_zero = false;
    for (double s : c.controller.candidate_speeds) {
        for (double t : c.controller.candidate_turns) {
            if (s == 0.0 && t == 0.0) has_zero = true;
        }
    }
    if (!has_zero) throw std::invalid_argument("config: candidate set must include the zero command");
    if (c.ppo.gamma <= 0 || c.ppo.gamma > 1 || c.ppo.gae_lambda <= 0 || c.ppo.gae_lambda > 1) {
        throw std::invalid_argument("config: gamma and lambda must be in (0, 1]");
    }
    if (c.ppo.clip_epsilon <= 0) throw std::invalid_argument("config: clip epsilon must be positive");
    if (c.termination.stall_limit <= 0) throw std::invalid_argument("config: stall limit must be positive");
    if (c.workers < 1) throw std::invalid_argument("config: workers must be >= 1");
    make_map(c.map_id);  // throws on unknown id
    // Start poses and goal must be legal for the map.
    StaticMap map = make_map(c.map_id);
    ScenarioConfig sc = make_scenario(c.scenario);
    if (human_map_clearance(sc.human_start.position(), map) < 0.0 ||
        robot_wall_clearance(sc.robot_start.position(), map) < 0.0 ||
        robot_wall_clearance(Vec2{sc.robot_goal.x, sc.robot_goal.y}, map) < 0.0) {
        throw std::invalid_argument("config: scenario poses collide with the map");
    }
}

// Canonical text form of everything that affects the simulation; hashed into
// every output file for provenance.
inline std::string canonical_config_text(const ExperimentConfig& c) {
    std::ostringstream os;
    os.precision(17);
    os << "scenario=" << to_string(c.scenario) << "\nscanner=" << to_string(c.scanner)
       << "\nalgorithm=" << to_string(c.algorithm) << "\nepisodes=" << c.episode_cap
       << "\ndt=" << c.dt << "\nmap=" << c.map_id
       << "\nanti_stall=" << c.termination.anti_stall
       << "\nstall_limit=" << c.termination.stall_limit
       << "\ntime_limit=" << c.termination.time_limit
       << "\nhorizon=" << c.controller.horizon << "\nspeeds=";
    for (double s : c.controller.candidate_speeds) os << s << ",";
    os << "\nturns=";
    for (double t : c.controller.candidate_turns) os << t << ",";
    os << "\nweights=" << c.controller.goal_weight << "," << c.controller.human_weight << ","
       << c.controller.wall_weight << "," << c.controller.effort_weight
       << "\nrestart=" << c.controller.restart_clear_time
       << "\ngoal_radius=" << c.controller.goal_radius
       << "\nwall_margin=" << c.controller.wall_margin
       << "\ngamma=" << c.ppo.gamma << "\nlambda=" << c.ppo.gae_lambda
       << "\nclip=" << c.ppo.clip_epsilon << "\nlr=" << c.ppo.learning_rate
       << "\nepochs=" << c.ppo.epochs << "\nbatch=" << c.ppo.batch_size
       << "\nminibatch=" << c.ppo.minibatch_size << "\nent=" << c.ppo.entropy_coef
       << "\nvf=" << c.ppo.value_coef << "\ngradclip=" << c.ppo.max_grad_norm << "\n";
    return os.str();
}

inline std::string config_hash(const ExperimentConfig& c) {
    std::string text = canonical_config_text(c);
    uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace falsify
