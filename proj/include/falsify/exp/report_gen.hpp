#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "falsify/analysis/report.hpp"
#include "falsify/exp/log.hpp"

namespace falsify {

struct LoadedRun {
    RunLog log;
    double runtime_seconds = 0.0;
    std::vector<double> wall_per_100_episodes;
};

// Loads every run directory (episodes.jsonl plus optional run_meta.json)
// found under root, in sorted order for reproducible reports.
inline std::vector<LoadedRun> load_runs(const std::string& root) {
    namespace fs = std::filesystem;
    std::vector<fs::path> log_paths;
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
        if (entry.is_regular_file() && entry.path().filename() == "episodes.jsonl") {
            log_paths.push_back(entry.path());
        }
    }
    std::sort(log_paths.begin(), log_paths.end());

    std::vector<LoadedRun> runs;
    for (const auto& p : log_paths) {
        LoadedRun run;
        run.log = read_run_log(p.string());
        fs::path meta_path = p.parent_path() / "run_meta.json";
        if (fs::exists(meta_path)) {
            std::ifstream ms(meta_path);
            nlohmann::json meta = nlohmann::json::parse(ms);
            run.runtime_seconds = meta.value("runtime_seconds", 0.0);
            if (meta.contains("wall_per_100_episodes")) {
                run.wall_per_100_episodes =
                    meta["wall_per_100_episodes"].get<std::vector<double>>();
            }
        }
        runs.push_back(std::move(run));
    }
    return runs;
}

inline RunSummary summarize_run(const LoadedRun& run) {
    RunSummary s;
    s.scenario = run.log.scenario;
    s.scanner = run.log.scanner;
    s.algorithm = run.log.algorithm;
    s.seed = run.log.seed;
    s.episodes = static_cast<long>(run.log.episodes.size());
    s.runtime_seconds = run.runtime_seconds;
    double in_field_total = 0.0;
    for (const auto& e : run.log.episodes) {
        in_field_total += e.in_field;
        switch (e.termination) {
            case TerminationReason::UnsafeCollision:
                ++s.unsafe_collisions;
                if (e.contact) {
                    s.classes_found.insert(classify_collision(*e.contact, Verdict::Unsafe).id());
                }
                break;
            case TerminationReason::ExcludedCollision: ++s.excluded_collisions; break;
            case TerminationReason::ScannerStall: ++s.stall_terminations; break;
            default: break;
        }
    }
    s.mean_in_field_time = s.episodes > 0 ? in_field_total / s.episodes : 0.0;
    return s;
}

inline std::vector<EpisodeMetrics> episode_metrics(const RunLog& log) {
    std::vector<EpisodeMetrics> out;
    out.reserve(log.episodes.size());
    for (const auto& e : log.episodes) {
        EpisodeMetrics m;
        m.termination = e.termination;
        m.steps = e.steps;
        m.in_field_time = e.in_field;
        m.stop_restart_cycles = e.cycles;
        out.push_back(m);
    }
    return out;
}

inline int classes_possible(const std::string& scanner_name) {
    return scanner_name == "Lnone" ? 8 : 9;
}

// Writes the four report CSVs into out_dir. Pure function of the loaded
// runs, so regeneration from the same logs is bit-identical.
inline void write_reports(const std::vector<LoadedRun>& runs, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);

    std::vector<RunSummary> summaries;
    for (const auto& r : runs) summaries.push_back(summarize_run(r));
    auto aggregates = aggregate_runs(summaries);

    {
        std::ofstream os(fs::path(out_dir) / "collisions_by_config.csv");
        os << "scenario,scanner,algorithm,seeds,mean_unsafe_collisions,mean_excluded_collisions\n";
        for (const auto& [key, a] : aggregates) {
            os << a.scenario << "," << a.scanner << "," << a.algorithm << "," << a.seeds << ","
               << format_number(a.mean_unsafe) << "," << format_number(a.mean_excluded) << "\n";
        }
    }
    {
        std::ofstream os(fs::path(out_dir) / "classes_by_config.csv");
        os << "scenario,scanner,algorithm,classes_found,classes_possible\n";
        for (const auto& [key, a] : aggregates) {
            os << a.scenario << "," << a.scanner << "," << a.algorithm << ","
               << a.classes_union.size() << "," << classes_possible(a.scanner) << "\n";
        }
    }
    {
        std::ofstream os(fs::path(out_dir) / "runtimes.csv");
        os << "scenario,scanner,algorithm,mean_runtime_seconds\n";
        for (const auto& [key, a] : aggregates) {
            os << a.scenario << "," << a.scanner << "," << a.algorithm << ","
               << format_number(a.mean_runtime) << "\n";
        }
    }
    {
        std::ofstream os(fs::path(out_dir) / "hacking_metrics.csv");
        os << "scenario,scanner,algorithm,seed,window_first_ep,window_last_ep,"
              "timeout_or_stall_fraction,mean_in_field_time,mean_episode_steps,"
              "mean_stop_restart_cycles\n";
        for (const auto& r : runs) {
            auto windows = reward_hacking_report(episode_metrics(r.log));
            for (const auto& w : windows) {
                os << r.log.scenario << "," << r.log.scanner << "," << r.log.algorithm << ","
                   << r.log.seed << "," << w.first_episode << "," << w.last_episode << ","
                   << format_number(w.timeout_or_stall_fraction) << ","
                   << format_number(w.mean_in_field_time) << ","
                   << format_number(w.mean_episode_steps) << ","
                   << format_number(w.mean_cycles) << "\n";
            }
        }
    }
}

}  // namespace falsify
