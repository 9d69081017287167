#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "falsify/exp/matrix.hpp"
#include "falsify/exp/report_gen.hpp"
#include "falsify/exp/runner.hpp"

namespace {

struct CommonOpts {
    std::string config_file;
    std::string scenario, scanner, algorithm, seeds, stall;
    std::string out_dir;
    long episodes = -1;
    int workers = -1;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--config", o.config_file, "Config file (INI-style key = value)");
    cmd->add_option("--scenario", o.scenario, "crossing | headon | overtaking");
    cmd->add_option("--scanner", o.scanner, "Lnone | L1.25m | L2m");
    cmd->add_option("--algorithm", o.algorithm, "RLacc | RLmax | RS");
    cmd->add_option("--seeds", o.seeds, "Comma-separated seed list");
    cmd->add_option("--episodes", o.episodes, "Episode cap per run");
    cmd->add_option("--out", o.out_dir, "Output directory");
    cmd->add_option("--stall-termination", o.stall, "on | off (anti-stall rule)");
    cmd->add_option("--workers", o.workers, "Parallel runs");
}

falsify::ExperimentConfig build_config(const CommonOpts& o) {
    falsify::ExperimentConfig cfg;
    if (!o.config_file.empty()) cfg = falsify::load_config_file(o.config_file);
    if (!o.scenario.empty()) cfg.scenario = falsify::parse_scenario(o.scenario);
    if (!o.scanner.empty()) cfg.scanner = falsify::parse_scanner(o.scanner);
    if (!o.algorithm.empty()) cfg.algorithm = falsify::parse_algorithm(o.algorithm);
    if (!o.seeds.empty()) cfg.seeds = falsify::detail::parse_seed_list(o.seeds);
    if (o.episodes >= 0) cfg.episode_cap = o.episodes;
    if (!o.out_dir.empty()) cfg.out_dir = o.out_dir;
    if (!o.stall.empty()) cfg.termination.anti_stall = falsify::detail::parse_bool(o.stall);
    if (o.workers >= 1) cfg.workers = o.workers;
    return cfg;
}

int print_run_results(const std::vector<falsify::RunArtifacts>& artifacts) {
    int failures = 0;
    for (const auto& a : artifacts) {
        if (a.failed) {
            ++failures;
            std::cout << "FAILED seed run in " << a.run_dir << ": " << a.failure_message << "\n";
            continue;
        }
        const auto& s = a.summary;
        std::cout << s.scenario << "/" << s.scanner << "/" << s.algorithm << " seed " << s.seed
                  << ": " << s.episodes << " episodes, " << s.unsafe_collisions << " unsafe, "
                  << s.excluded_collisions << " excluded, " << s.classes_found.size()
                  << " classes, " << falsify::format_number(s.runtime_seconds) << " s\n";
    }
    return failures;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"RL-based falsification harness for a predictive-controlled mobile robot"};
    app.require_subcommand(1);

    CommonOpts run_opts;
    bool resume = false;
    long episode_limit = -1;
    auto* run_cmd = app.add_subcommand("run", "Run one configuration over its seeds");
    add_common(run_cmd, run_opts);
    run_cmd->add_flag("--resume", resume, "Resume from the saved run state");
    run_cmd->add_option("--episode-limit", episode_limit,
                        "Stop after this many episodes this invocation (for interrupt tests)");

    CommonOpts matrix_opts;
    bool dry_run = false;
    auto* matrix_cmd = app.add_subcommand("matrix", "Run the full 27-configuration matrix");
    add_common(matrix_cmd, matrix_opts);
    matrix_cmd->add_flag("--dry-run", dry_run, "Only list the scheduled runs");

    std::string report_in, report_out;
    auto* report_cmd = app.add_subcommand("report", "Generate CSV reports from run logs");
    report_cmd->add_option("dir", report_in, "Directory containing run outputs")->required();
    report_cmd->add_option("--out", report_out, "Report output directory");

    CommonOpts validate_opts;
    auto* validate_cmd = app.add_subcommand("validate-config", "Validate a configuration");
    add_common(validate_cmd, validate_opts);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run_cmd) {
            falsify::ExperimentConfig cfg = build_config(run_opts);
            falsify::validate_config(cfg);
            auto artifacts = falsify::run_experiment(cfg, resume, episode_limit);
            return print_run_results(artifacts) == 0 ? 0 : 1;
        }
        if (*matrix_cmd) {
            falsify::ExperimentConfig defaults = build_config(matrix_opts);
            falsify::validate_config(defaults);
            auto configs = falsify::build_matrix(defaults);
            long scheduled = 0;
            for (const auto& c : configs) scheduled += static_cast<long>(c.seeds.size());
            std::cout << "scheduled " << configs.size() << " configurations, " << scheduled
                      << " runs\n";
            if (dry_run) {
                for (const auto& c : configs) {
                    for (uint64_t seed : c.seeds) {
                        std::cout << falsify::run_dir_name(c, seed) << "\n";
                    }
                }
                return 0;
            }
            int failures = 0;
            for (const auto& c : configs) {
                failures += print_run_results(falsify::run_experiment(c));
            }
            return failures == 0 ? 0 : 1;
        }
        if (*report_cmd) {
            if (report_out.empty()) report_out = report_in + "/report";
            auto runs = falsify::load_runs(report_in);
            falsify::write_reports(runs, report_out);
            std::cout << "wrote reports for " << runs.size() << " runs to " << report_out << "\n";
            return 0;
        }
        if (*validate_cmd) {
            falsify::ExperimentConfig cfg = build_config(validate_opts);
            falsify::validate_config(cfg);
            std::cout << "config ok, hash " << falsify::config_hash(cfg) << "\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
