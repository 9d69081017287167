#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "falsify/analysis/report.hpp"
#include "falsify/exp/config.hpp"
#include "falsify/exp/log.hpp"
#include "falsify/exp/scenario.hpp"
#include "falsify/rl/checkpoint.hpp"
#include "falsify/rl/observation.hpp"
#include "falsify/rl/policy.hpp"
#include "falsify/rl/ppo.hpp"
#include "falsify/rl/random_agent.hpp"
#include "falsify/sut/controller.hpp"
#include "falsify/testing/problem.hpp"

namespace falsify {

namespace detail {

inline uint64_t mix_seed(uint64_t seed, uint64_t stream) {
    uint64_t z = seed + stream * 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

}  // namespace detail

struct RunArtifacts {
    std::string run_dir;
    std::string log_path;
    std::vector<std::string> checkpoint_paths;
    RunSummary summary;
    std::string config_hash;
    bool failed = false;
    std::string failure_message;
};

inline std::string run_dir_name(const ExperimentConfig& cfg, uint64_t seed) {
    std::ostringstream os;
    os << to_string(cfg.scenario) << "_" << to_string(cfg.scanner) << "_"
       << to_string(cfg.algorithm) << "_seed" << seed;
    return os.str();
}

// Mutable per-seed learner/sampler state; serializable for interrupt/resume.
struct RunState {
    long next_episode = 0;
    Rng act_rng{0};
    Rng update_rng{0};
    PolicyParams params;
    AdamOptimizer adam{0, 0.0};
    TransitionBatch batch;
    // Running summary counters.
    long unsafe = 0, excluded = 0, stalls = 0;
    double in_field_total = 0.0;
    std::set<int> classes_found;

    static RunState fresh(const ExperimentConfig& cfg, uint64_t seed) {
        RunState rs;
        rs.act_rng = Rng(detail::mix_seed(seed, 1));
        rs.update_rng = Rng(detail::mix_seed(seed, 3));
        rs.params = PolicyParams::random(detail::mix_seed(seed, 2));
        size_t n = rs.params.actor.param_count() + rs.params.critic.param_count();
        rs.adam = AdamOptimizer(n, cfg.ppo.learning_rate);
        return rs;
    }

    void save(const std::string& path) const {
        std::ofstream os(path);
        os.precision(17);
        os << "falsify-run-state 1\n" << next_episode << "\n";
        act_rng.save(os);
        update_rng.save(os);
        auto dump = [&os](const std::vector<double>& v) {
            os << v.size() << "\n";
            for (double x : v) os << x << " ";
            os << "\n";
        };
        dump(params.actor.flatten());
        dump(params.critic.flatten());
        adam.save(os);
        os << batch.size() << "\n";
        for (size_t i = 0; i < batch.size(); ++i) {
            for (double x : batch.observations[i]) os << x << " ";
            os << batch.z[i][0] << " " << batch.z[i][1] << " " << batch.log_probs[i] << " "
               << batch.rewards[i] << " " << int(batch.done[i]) << " " << batch.values[i]
               << " " << batch.next_values[i] << "\n";
        }
        os << unsafe << " " << excluded << " " << stalls << " " << in_field_total << "\n";
        os << classes_found.size();
        for (int c : classes_found) os << " " << c;
        os << "\n";
    }

    static RunState load(const std::string& path, const ExperimentConfig& cfg) {
        std::ifstream is(path);
        if (!is) throw std::runtime_error("cannot open run state: " + path);
        std::string tag;
        int version;
        is >> tag >> version;
        if (tag != "falsify-run-state" || version != 1) {
            throw std::runtime_error("bad run state file: " + path);
        }
        RunState rs = fresh(cfg, 0);
        is >> rs.next_episode;
        rs.act_rng.load(is);
        rs.update_rng.load(is);
        auto slurp = [&is]() {
            size_t n;
            is >> n;
            std::vector<double> v(n);
            for (double& x : v) is >> x;
            return v;
        };
        rs.params.actor.unflatten(slurp());
        rs.params.critic.unflatten(slurp());
        rs.adam.load(is);
        size_t nb;
        is >> nb;
        rs.batch.clear();
        for (size_t i = 0; i < nb; ++i) {
            std::vector<double> obs(kObservationDim);
            for (double& x : obs) is >> x;
            std::array<double, 2> z;
            double lp, rw, val, nval;
            int done;
            is >> z[0] >> z[1] >> lp >> rw >> done >> val >> nval;
            rs.batch.observations.push_back(std::move(obs));
            rs.batch.z.push_back(z);
            rs.batch.log_probs.push_back(lp);
            rs.batch.rewards.push_back(rw);
            rs.batch.done.push_back(static_cast<uint8_t>(done));
            rs.batch.values.push_back(val);
            rs.batch.next_values.push_back(nval);
        }
        is >> rs.unsafe >> rs.excluded >> rs.stalls >> rs.in_field_total;
        size_t nc;
        is >> nc;
        for (size_t i = 0; i < nc; ++i) {
            int c;
            is >> c;
            rs.classes_found.insert(c);
        }
        if (!is) throw std::runtime_error("truncated run state: " + path);
        return rs;
    }
};

struct EpisodeOutcome {
    TerminationReason termination = TerminationReason::Timeout30s;
    long steps = 0;
    double in_field = 0.0;
    long cycles = 0;
    std::optional<ContactInfo> contact;
    Verdict final_verdict = Verdict::Safe;
};

// Runs one episode, logging every step and (for RL modes) filling the PPO
// batch. A full batch triggers an update mid-episode; the truncated segment
// bootstraps from the critic.
inline EpisodeOutcome run_episode(const ExperimentConfig& cfg, const ScenarioConfig& scenario,
                                  const StaticMap& map, const ScannerConfig& scanner,
                                  RunState& rs, long ep, LogWriter& log) {
    const bool learning = cfg.algorithm != Algorithm::RS;
    WorldState s = initial_state(scenario);
    s.scanner_triggered = human_in_scanner_field(s, scanner);

    EpisodeOutcome out;
    std::vector<double> episode_risks;
    RobotMode prev_mode = s.robot.mode;

    for (long step_idx = 1;; ++step_idx) {
        HumanAction action;
        std::vector<double> obs;
        ActionSample sample;
        double value = 0.0;
        if (learning) {
            obs = encode_observation(s);
            sample = policy_act(rs.params, obs, rs.act_rng, /*stochastic=*/true);
            action = sample.action;
            value = critic_value(rs.params, obs);
        } else {
            action = random_act(s, map, rs.act_rng, cfg.dt);
        }

        RobotCommand cmd;
        if (s.robot.mode == RobotMode::Driving) {
            HumanPrediction pred = predict_human(s.human, cfg.controller.horizon, cfg.dt, map);
            cmd = plan_step(s, pred, cfg.controller, map, cfg.dt);
        }
        cmd = safety_override(cmd, s, scanner, cfg.controller, cfg.dt);
        if (s.robot.mode != prev_mode) {
            if (prev_mode == RobotMode::ScannerStopped && s.robot.mode == RobotMode::Driving) {
                ++out.cycles;
            }
            prev_mode = s.robot.mode;
        }

        WorldState next = step_world(s, action, cmd.speed, cmd.turn_rate, map, scanner, cfg.dt);
        Verdict verdict = safety_spec(next);
        double r = risk(next, verdict);
        episode_risks.push_back(r);

        auto term = check_termination(next, verdict, cfg.termination);

        double reward;
        if (cfg.algorithm == Algorithm::RL_acc) {
            reward = reward_accumulated(r);
        } else {
            size_t n = episode_risks.size();
            reward = reward_max(episode_risks, term ? n : n + 1, n);
        }

        log.step(ep, step_idx, next, action, r, reward, verdict);

        if (learning) {
            bool terminal = term.has_value();
            bool truncated = terminal && (*term == TerminationReason::Timeout30s ||
                                          *term == TerminationReason::ScannerStall);
            double next_value = 0.0;
            if (!terminal || truncated) {
                next_value = critic_value(rs.params, encode_observation(next));
            }
            rs.batch.observations.push_back(obs);
            rs.batch.z.push_back(sample.z);
            rs.batch.log_probs.push_back(sample.log_prob);
            rs.batch.rewards.push_back(reward);
            rs.batch.done.push_back(terminal ? 1 : 0);
            rs.batch.values.push_back(value);
            rs.batch.next_values.push_back(next_value);

            if (rs.batch.size() >= static_cast<size_t>(cfg.ppo.batch_size)) {
                if (!terminal) {
                    // Truncate the running episode at the batch edge.
                    rs.batch.done.back() = 1;
                }
                compute_gae(rs.batch, cfg.ppo.gamma, cfg.ppo.gae_lambda);
                ppo_update(rs.params, rs.batch, cfg.ppo, rs.adam, rs.update_rng);
                rs.batch.clear();
            }
        }

        s = next;
        out.steps = step_idx;
        if (term) {
            out.termination = *term;
            out.in_field = s.in_field_accumulated;
            out.contact = s.contact;
            out.final_verdict = verdict;
            break;
        }
    }
    return out;
}

// One (config, seed) run: episode loop, checkpoints, logs, summary. Resumes
// from a saved run state when one exists and resume is requested.
inline RunArtifacts run_single(const ExperimentConfig& cfg, uint64_t seed,
                               bool resume = false, long episode_limit_this_call = -1) {
    namespace fs = std::filesystem;
    RunArtifacts art;
    art.config_hash = config_hash(cfg);
    fs::path dir = fs::path(cfg.out_dir) / run_dir_name(cfg, seed);
    art.run_dir = dir.string();
    fs::create_directories(dir / "checkpoints");
    fs::path state_path = dir / "run_state.txt";
    fs::path fail_path = dir / "FAILED";
    std::error_code ec;
    fs::remove(fail_path, ec);

    const bool learning = cfg.algorithm != Algorithm::RS;
    ScenarioConfig scenario = make_scenario(cfg.scenario);
    StaticMap map = make_map(cfg.map_id);
    ScannerConfig scanner = ScannerConfig::make(cfg.scanner);

    RunState rs;
    bool appending = false;
    if (resume && fs::exists(state_path)) {
        rs = RunState::load(state_path.string(), cfg);
        appending = true;
    } else {
        rs = RunState::fresh(cfg, seed);
    }

    art.log_path = (dir / "episodes.jsonl").string();
    std::optional<LogWriter> log;
    log.emplace(art.log_path, cfg, seed, appending);

    auto t0 = std::chrono::steady_clock::now();
    std::vector<double> wall_per_block;  // seconds per 100 episodes
    auto block_t0 = t0;

    RunSummary& sum = art.summary;
    sum.scenario = to_string(cfg.scenario);
    sum.scanner = to_string(cfg.scanner);
    sum.algorithm = to_string(cfg.algorithm);
    sum.seed = seed;

    try {
        long end_episode = cfg.episode_cap;
        if (episode_limit_this_call >= 0) {
            end_episode = std::min(end_episode, rs.next_episode + episode_limit_this_call);
        }
        for (long ep = rs.next_episode; ep < end_episode; ++ep) {
            EpisodeOutcome out = run_episode(cfg, scenario, map, scanner, rs, ep, *log);
            log->episode_end(ep, out.termination, out.steps, out.in_field, out.cycles,
                             out.contact, out.final_verdict);

            rs.in_field_total += out.in_field;
            if (out.termination == TerminationReason::UnsafeCollision) {
                ++rs.unsafe;
                if (out.contact) {
                    rs.classes_found.insert(
                        classify_collision(*out.contact, Verdict::Unsafe).id());
                }
            } else if (out.termination == TerminationReason::ExcludedCollision) {
                ++rs.excluded;
            } else if (out.termination == TerminationReason::ScannerStall) {
                ++rs.stalls;
            }
            rs.next_episode = ep + 1;

            if ((ep + 1) % 100 == 0) {
                auto now = std::chrono::steady_clock::now();
                wall_per_block.push_back(std::chrono::duration<double>(now - block_t0).count());
                block_t0 = now;
            }
            if (cfg.checkpoint_every > 0 && (ep + 1) % cfg.checkpoint_every == 0) {
                if (learning) {
                    std::string ck = (dir / "checkpoints" /
                                      ("ck_" + std::to_string(ep + 1) + ".bin")).string();
                    save_checkpoint(ck, rs.params);
                    art.checkpoint_paths.push_back(ck);
                }
                log->flush();
                rs.save(state_path.string());
            }
        }

        if (learning) {
            std::string ck = (dir / "checkpoints" / "ck_final.bin").string();
            save_checkpoint(ck, rs.params);
            art.checkpoint_paths.push_back(ck);
        }
        rs.save(state_path.string());
    } catch (const std::exception& e) {
        log->flush();
        std::ofstream f(fail_path);
        f << e.what() << "\n";
        art.failed = true;
        art.failure_message = e.what();
        return art;
    }

    double runtime = std::chrono::duration<double>(
        std::chrono::steady_clock::now() - t0).count();

    sum.episodes = rs.next_episode;
    sum.unsafe_collisions = rs.unsafe;
    sum.excluded_collisions = rs.excluded;
    sum.stall_terminations = rs.stalls;
    sum.classes_found = rs.classes_found;
    sum.runtime_seconds = runtime;
    sum.mean_in_field_time = rs.next_episode > 0 ? rs.in_field_total / rs.next_episode : 0.0;

    nlohmann::json meta;
    meta["config_hash"] = art.config_hash;
    meta["seed"] = seed;
    meta["episodes"] = sum.episodes;
    meta["runtime_seconds"] = runtime;
    meta["wall_per_100_episodes"] = wall_per_block;
    std::ofstream ms(dir / "run_meta.json");
    ms << meta.dump(2) << "\n";

    std::ofstream cs(dir / "config_snapshot.txt");
    cs << "# hash " << art.config_hash << "\n" << canonical_config_text(cfg);
    return art;
}

// Runs all seeds of a config, optionally in a worker pool (one run per worker).
inline std::vector<RunArtifacts> run_experiment(const ExperimentConfig& cfg,
                                                bool resume = false,
                                                long episode_limit_this_call = -1) {
    validate_config(cfg);
    std::vector<RunArtifacts> artifacts(cfg.seeds.size());
    int workers = std::max(1, std::min<int>(cfg.workers, static_cast<int>(cfg.seeds.size())));
    if (workers == 1) {
        for (size_t i = 0; i < cfg.seeds.size(); ++i) {
            artifacts[i] = run_single(cfg, cfg.seeds[i], resume, episode_limit_this_call);
        }
    } else {
        std::vector<std::thread> pool;
        std::atomic<size_t> next{0};
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&]() {
                for (size_t i = next.fetch_add(1); i < cfg.seeds.size(); i = next.fetch_add(1)) {
                    artifacts[i] = run_single(cfg, cfg.seeds[i], resume, episode_limit_this_call);
                }
            });
        }
        for (auto& t : pool) t.join();
    }
    return artifacts;
}

}  // namespace falsify
