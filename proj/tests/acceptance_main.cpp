// Acceptance suite: one pass/fail line per criterion. Criteria 6-8 train and
// sample at full desk scale (2000 episodes x 3 seeds per configuration), so
// the complete suite runs for tens of minutes. Heavy runs are cached under
// the output directory and resumed if present.
//
// Usage: acceptance_tests [--out DIR] [criterion numbers...]

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "falsify/exp/matrix.hpp"
#include "falsify/exp/report_gen.hpp"
#include "falsify/exp/runner.hpp"

using namespace falsify;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;
std::string g_out = "acceptance_out";

void report(int id, const char* name, bool ok, const std::string& detail = "") {
    std::printf("criterion %d (%s): %s%s%s\n", id, name, ok ? "PASS" : "FAIL",
                detail.empty() ? "" : " - ", detail.c_str());
    std::fflush(stdout);
    if (!ok) ++g_failures;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

long count_lines(const fs::path& p) {
    std::ifstream is(p);
    long n = 0;
    std::string line;
    while (std::getline(is, line)) ++n;
    return n;
}

WorldState contact_state(ContactSector sector, double robot_speed, double human_speed,
                         Vec2 approach) {
    WorldState s;
    s.robot.pose = Pose{6, 6, 0};
    s.robot.speed = robot_speed;
    s.human.speed = human_speed;
    ContactInfo c;
    c.robot_sector = sector;
    c.robot_speed_at_impact = robot_speed;
    c.human_speed_at_impact = human_speed;
    c.human_approach = approach.normalized();
    s.contact = c;
    return s;
}

WorldState proximity_state(double gap, double robot_speed) {
    WorldState s;
    s.robot.pose = Pose{6, 6, 0};
    s.robot.speed = robot_speed;
    s.human.pose = Pose{6 + limits::kRobotHalfLength + limits::kHumanRadius + gap, 6, 0};
    return s;
}

// Desk-scale experiment preset shared by criteria 6-8.
ExperimentConfig desk_config(Algorithm algo, ScannerSetting scanner, const std::string& tag) {
    ExperimentConfig cfg;
    cfg.scenario = Scenario::Crossing;
    cfg.scanner = scanner;
    cfg.algorithm = algo;
    cfg.seeds = {1, 2, 3};
    cfg.episode_cap = 2000;
    cfg.workers = 3;
    cfg.out_dir = (fs::path(g_out) / tag).string();
    return cfg;
}

bool run_complete(const ExperimentConfig& cfg, uint64_t seed) {
    fs::path meta = fs::path(cfg.out_dir) / run_dir_name(cfg, seed) / "run_meta.json";
    if (!fs::exists(meta)) return false;
    try {
        std::ifstream is(meta);
        nlohmann::json j = nlohmann::json::parse(is);
        return j.value("episodes", 0L) >= cfg.episode_cap;
    } catch (...) {
        return false;
    }
}

// Executes the config unless every seed already finished; completed runs keep
// their wall-clock blocks intact.
std::vector<LoadedRun> ensure_runs(const ExperimentConfig& cfg) {
    bool all_done = true;
    for (uint64_t s : cfg.seeds) all_done = all_done && run_complete(cfg, s);
    if (!all_done) {
        auto arts = run_experiment(cfg, /*resume=*/true);
        for (const auto& a : arts) {
            if (a.failed) throw std::runtime_error("run failed: " + a.failure_message);
        }
    }
    return load_runs(cfg.out_dir);
}

std::vector<long> unsafe_by_seed(const std::vector<LoadedRun>& runs,
                                 const std::vector<uint64_t>& seeds) {
    std::vector<long> out(seeds.size(), 0);
    for (const auto& r : runs) {
        RunSummary s = summarize_run(r);
        for (size_t i = 0; i < seeds.size(); ++i) {
            if (s.seed == seeds[i]) out[i] = s.unsafe_collisions;
        }
    }
    return out;
}

struct QuarterStats {
    double cycles = 0.0;
    double in_field = 0.0;
};

// Mean last-quarter hacking metrics over the seeds of a configuration.
QuarterStats last_quarter(const std::vector<LoadedRun>& runs) {
    QuarterStats q;
    int n = 0;
    for (const auto& r : runs) {
        auto windows = reward_hacking_report(episode_metrics(r.log));
        if (windows.empty()) continue;
        q.cycles += windows.back().mean_cycles;
        q.in_field += windows.back().mean_in_field_time;
        ++n;
    }
    if (n > 0) {
        q.cycles /= n;
        q.in_field /= n;
    }
    return q;
}

double mean_wall_per_100(const std::vector<LoadedRun>& runs) {
    double sum = 0.0;
    long n = 0;
    for (const auto& r : runs) {
        for (double w : r.wall_per_100_episodes) {
            sum += w;
            ++n;
        }
    }
    return n > 0 ? sum / n : 0.0;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

// --- criterion 1: risk-metric exactness ------------------------------------

void criterion_1() {
    bool ok = true;
    std::ostringstream why;

    auto expect_near = [&](double got, double want, const char* what) {
        if (std::abs(got - want) > 1e-9) {
            ok = false;
            why << what << " got " << got << " want " << want << "; ";
        }
    };
    expect_near(risk(contact_state(ContactSector::Front, 1.0, 1.5, {1, 0}), Verdict::Unsafe),
                200.0, "full-speed collision");
    expect_near(risk(contact_state(ContactSector::Front, 0.8, 0.0, {1, 0}), Verdict::Unsafe),
                100.0, "stationary-human collision");
    expect_near(risk(proximity_state(2.0, 0.5), Verdict::Safe), std::exp(-2.0), "2 m proximity");
    expect_near(risk(proximity_state(0.5, 0.0), Verdict::Safe), 0.0, "stationary robot");

    Rng rng(171);
    std::vector<double> ds(1000);
    for (auto& d : ds) d = rng.uniform(0.0, 10.0);
    std::sort(ds.begin(), ds.end());
    double prev = 1e9;
    for (double d : ds) {
        double r = risk(proximity_state(d, 0.7), Verdict::Safe);
        if (r < 0.0 || r > 200.0 || r > prev + 1e-15) {
            ok = false;
            why << "monotonicity broken at d=" << d << "; ";
            break;
        }
        prev = r;
    }
    report(1, "risk metric exactness", ok, why.str());
}

// --- criterion 2: reward-formulation law -----------------------------------

void criterion_2() {
    Rng rng(202);
    bool ok = true;
    std::string why;
    for (int t = 0; t < 10000 && ok; ++t) {
        size_t n = 1 + static_cast<size_t>(rng.next_u64() % 300);
        std::vector<double> risks(n);
        for (auto& r : risks) {
            r = rng.uniform01() < 0.05 ? rng.uniform(100, 200) : rng.uniform(0, 1);
        }
        double sum_acc = 0.0, sum_max = 0.0, direct_sum = 0.0, direct_max = 0.0;
        for (size_t k = 1; k <= n; ++k) {
            sum_acc += reward_accumulated(risks[k - 1]);
            sum_max += reward_max(risks, k, n);
            direct_sum += risks[k - 1];
            direct_max = std::max(direct_max, risks[k - 1]);
        }
        if (sum_acc != direct_sum || sum_max != direct_max) {
            ok = false;
            why = "trace " + std::to_string(t) + " violates the law";
        }
    }
    report(2, "reward formulation law", ok, why);
}

// --- criterion 3: safety-stop guarantee and lateral gap --------------------

void criterion_3() {
    Rng rng(303);
    ControllerParams cp;
    bool ok = true;
    std::ostringstream why;
    const double deg = M_PI / 180.0;

    long stop_fails = 0;
    for (int i = 0; i < 10000; ++i) {
        ScannerSetting setting = rng.uniform01() < 0.5 ? ScannerSetting::R1_25
                                                       : ScannerSetting::R2_0;
        ScannerConfig sc = ScannerConfig::make(setting);
        WorldState s;
        s.robot.pose = Pose{rng.uniform(3, 9), rng.uniform(3, 9), rng.uniform(-M_PI, M_PI)};
        s.robot.goal = Pose{11, 11, 0};
        // Bearing inside a sector, distance inside the radius, by construction.
        double bearing = rng.uniform01() < 0.5
            ? rng.uniform(-74.9 * deg, 74.9 * deg)
            : (rng.uniform01() < 0.5 ? 1 : -1) * rng.uniform(105.1 * deg, 180.0 * deg);
        double dist = rng.uniform(0.05, sc.radius - 0.01);
        Vec2 local{dist * std::cos(bearing), dist * std::sin(bearing)};
        Vec2 world = s.robot.pose.position() + local.rotated(s.robot.pose.heading);
        s.human.pose = Pose{world.x, world.y, rng.uniform(-M_PI, M_PI)};

        RobotCommand cmd = safety_override(RobotCommand{1.0, 0.5}, s, sc, cp, 0.1);
        if (cmd.speed != 0.0) ++stop_fails;
    }
    if (stop_fails > 0) {
        ok = false;
        why << stop_fails << " of 10000 in-field geometries were not stopped; ";
    }

    long gap_fails = 0;
    for (int i = 0; i < 10000; ++i) {
        ScannerSetting setting = rng.uniform01() < 0.5 ? ScannerSetting::R1_25
                                                       : ScannerSetting::R2_0;
        ScannerConfig sc = ScannerConfig::make(setting);
        WorldState s;
        s.robot.pose = Pose{rng.uniform(3, 9), rng.uniform(3, 9), rng.uniform(-M_PI, M_PI)};
        s.robot.goal = Pose{11, 11, 0};
        double bearing = (rng.uniform01() < 0.5 ? 1 : -1) * rng.uniform(75.2 * deg, 104.8 * deg);
        double dist = rng.uniform(0.6, sc.radius - 0.01);
        Vec2 local{dist * std::cos(bearing), dist * std::sin(bearing)};
        Vec2 world = s.robot.pose.position() + local.rotated(s.robot.pose.heading);
        s.human.pose = Pose{world.x, world.y, 0};

        if (human_in_scanner_field(s, sc)) ++gap_fails;
        RobotCommand cmd = safety_override(RobotCommand{1.0, 0.5}, s, sc, cp, 0.1);
        if (cmd.speed != 1.0) ++gap_fails;
    }
    if (gap_fails > 0) {
        ok = false;
        why << gap_fails << " lateral-gap geometries triggered the field";
    }
    report(3, "safety stop and lateral gap", ok, why.str());
}

// --- criterion 4: gradient check -------------------------------------------

void criterion_4() {
    bool ok = true;
    std::ostringstream why;
    double worst = 0.0;

    for (int net = 0; net < 20; ++net) {
        Rng rng(4000 + net);
        PolicyParams p;
        p.actor = Mlp({kObservationDim, 8, 2 * kActionDim});
        p.critic = Mlp({kObservationDim, 8, 1});
        p.actor.init_random(rng, 1.0);
        p.critic.init_random(rng, 1.0);

        TransitionBatch b;
        for (int i = 0; i < 8; ++i) {
            std::vector<double> obs(kObservationDim);
            for (auto& x : obs) x = rng.uniform(-1, 1);
            ActionSample s = policy_act(p, obs, rng, true);
            b.observations.push_back(obs);
            b.z.push_back(s.z);
            b.log_probs.push_back(s.log_prob);
            b.rewards.push_back(rng.uniform(0, 1));
            b.done.push_back(i == 7 ? 1 : 0);
            b.values.push_back(critic_value(p, obs));
            b.next_values.push_back(rng.uniform(-1, 1));
        }
        compute_gae(b, 0.99, 0.95);
        std::vector<double> adv = normalized_advantages(b);
        PpoHyperparams hp;
        std::vector<size_t> idx(b.size());
        std::iota(idx.begin(), idx.end(), 0);

        Mlp::Grads ag = p.actor.make_grads();
        Mlp::Grads cg = p.critic.make_grads();
        ppo_minibatch_grads(p, b, adv, hp, idx, 0, b.size(), ag, cg);
        std::vector<double> grad_a = flatten_grads(ag);
        std::vector<double> grad_c = flatten_grads(cg);

        auto check_net = [&](bool actor, const std::vector<double>& analytic) {
            std::vector<double> flat = actor ? p.actor.flatten() : p.critic.flatten();
            const double h = 1e-6;
            double num_norm = 0.0, diff = 0.0;
            for (size_t i = 0; i < flat.size(); ++i) {
                auto eval = [&](double delta) {
                    PolicyParams q = p;
                    std::vector<double> f = flat;
                    f[i] += delta;
                    if (actor) q.actor.unflatten(f);
                    else q.critic.unflatten(f);
                    Mlp::Grads ta = q.actor.make_grads();
                    Mlp::Grads tc = q.critic.make_grads();
                    PpoLosses l = ppo_minibatch_grads(q, b, adv, hp, idx, 0, b.size(), ta, tc);
                    return actor ? l.actor_loss : l.critic_loss;
                };
                double num = (eval(h) - eval(-h)) / (2 * h);
                num_norm += num * num;
                diff += (num - analytic[i]) * (num - analytic[i]);
            }
            return std::sqrt(diff) / (std::sqrt(num_norm) + 1e-12);
        };

        worst = std::max(worst, check_net(true, grad_a));
        worst = std::max(worst, check_net(false, grad_c));
    }
    if (worst >= 1e-4) {
        ok = false;
        why << "worst relative error " << worst;
    } else {
        why << "worst relative error " << fmt(worst);
    }
    report(4, "gradient check", ok, why.str());
}

// --- criterion 5: determinism ----------------------------------------------

void criterion_5() {
    bool ok = true;
    std::ostringstream why;

    {
        ExperimentConfig cfg;
        cfg.algorithm = Algorithm::RS;
        cfg.seeds = {7};
        cfg.episode_cap = 50;
        cfg.out_dir = (fs::path(g_out) / "c5_rs_a").string();
        fs::remove_all(cfg.out_dir);
        auto a = run_experiment(cfg);
        cfg.out_dir = (fs::path(g_out) / "c5_rs_b").string();
        fs::remove_all(cfg.out_dir);
        auto b = run_experiment(cfg);
        if (a[0].failed || b[0].failed) {
            ok = false;
            why << "RS run failed; ";
        } else if (slurp(a[0].log_path) != slurp(b[0].log_path)) {
            ok = false;
            why << "RS logs differ; ";
        }
    }
    {
        ExperimentConfig cfg;
        cfg.algorithm = Algorithm::RL_max;
        cfg.seeds = {7};
        cfg.episode_cap = 200;  // comfortably past 5 updates of 2048 steps
        cfg.out_dir = (fs::path(g_out) / "c5_rl_a").string();
        fs::remove_all(cfg.out_dir);
        auto a = run_experiment(cfg);
        cfg.out_dir = (fs::path(g_out) / "c5_rl_b").string();
        fs::remove_all(cfg.out_dir);
        auto b = run_experiment(cfg);
        if (a[0].failed || b[0].failed) {
            ok = false;
            why << "RL_max run failed";
        } else {
            long lines = count_lines(a[0].log_path);
            long steps = lines - 1 - 200;  // header and episode-end records
            if (steps < 5 * 2048) {
                ok = false;
                why << "only " << steps << " steps, fewer than 5 update batches";
            }
            if (slurp(a[0].log_path) != slurp(b[0].log_path)) {
                ok = false;
                why << "RL_max logs differ";
            }
        }
    }
    report(5, "run determinism", ok, why.str());
}

// --- criterion 6: learned search vs random baseline ------------------------

void criterion_6() {
    bool ok = true;
    std::ostringstream why;
    try {
        ExperimentConfig rlmax = desk_config(Algorithm::RL_max, ScannerSetting::R1_25, "rlmax");
        ExperimentConfig rs = desk_config(Algorithm::RS, ScannerSetting::R1_25, "rs");
        auto rlmax_runs = ensure_runs(rlmax);
        auto rs_runs = ensure_runs(rs);

        std::vector<long> rl = unsafe_by_seed(rlmax_runs, rlmax.seeds);
        std::vector<long> base = unsafe_by_seed(rs_runs, rs.seeds);
        long rl_total = std::accumulate(rl.begin(), rl.end(), 0L);
        long base_total = std::accumulate(base.begin(), base.end(), 0L);
        int wins = 0;
        for (size_t i = 0; i < rl.size(); ++i) {
            if (rl[i] >= base[i]) ++wins;
        }
        why << "unsafe RLmax {" << rl[0] << "," << rl[1] << "," << rl[2] << "} RS {"
            << base[0] << "," << base[1] << "," << base[2] << "}";
        if (rl_total < base_total) {
            ok = false;
            why << "; mean ordering violated";
        }
        if (wins < 2) {
            ok = false;
            why << "; only " << wins << " of 3 seed-matched wins";
        }
        if (rl_total < 1) {
            ok = false;
            why << "; RLmax found no unsafe collision";
        }
    } catch (const std::exception& e) {
        ok = false;
        why << e.what();
    }
    report(6, "learned vs random collision search", ok, why.str());
}

// --- criterion 7: reward-hacking signature and anti-stall runtime ----------

void criterion_7() {
    bool ok = true;
    std::ostringstream why;
    try {
        ExperimentConfig rlmax = desk_config(Algorithm::RL_max, ScannerSetting::R1_25, "rlmax");
        ExperimentConfig nostall =
            desk_config(Algorithm::RL_acc, ScannerSetting::R1_25, "rlacc_nostall");
        nostall.termination.anti_stall = false;
        ExperimentConfig stall = desk_config(Algorithm::RL_acc, ScannerSetting::R1_25, "rlacc");

        auto rlmax_runs = ensure_runs(rlmax);
        auto nostall_runs = ensure_runs(nostall);
        auto stall_runs = ensure_runs(stall);

        QuarterStats qm = last_quarter(rlmax_runs);
        QuarterStats qa = last_quarter(nostall_runs);
        why << "last-quarter cycles " << fmt(qa.cycles) << " vs " << fmt(qm.cycles)
            << ", in-field " << fmt(qa.in_field) << " vs " << fmt(qm.in_field);
        if (!(qa.cycles > 0.0 && qa.cycles >= 2.0 * qm.cycles)) {
            ok = false;
            why << "; cycle factor < 2";
        }
        if (!(qa.in_field > 0.0 && qa.in_field >= 2.0 * qm.in_field)) {
            ok = false;
            why << "; in-field factor < 2";
        }

        double wall_acc = mean_wall_per_100(stall_runs);
        double wall_max = mean_wall_per_100(rlmax_runs);
        why << "; wall/100ep " << fmt(wall_acc) << "s vs " << fmt(wall_max) << "s";
        if (!(wall_acc > 0.0 && wall_max > 0.0 && wall_acc > wall_max)) {
            ok = false;
            why << "; anti-stall runtime direction violated";
        }
    } catch (const std::exception& e) {
        ok = false;
        why << e.what();
    }
    report(7, "reward hacking signature", ok, why.str());
}

// --- criterion 8: collision-class diversity --------------------------------

void criterion_8() {
    bool ok = true;
    std::ostringstream why;
    try {
        ExperimentConfig lnone = desk_config(Algorithm::RS, ScannerSetting::None, "rs_lnone");
        auto lnone_runs = ensure_runs(lnone);

        std::set<int> classes;
        for (const auto& r : lnone_runs) {
            RunSummary s = summarize_run(r);
            classes.insert(s.classes_found.begin(), s.classes_found.end());
        }
        for (int c : classes) {
            if (c < 0 || c > 7) {
                ok = false;
                why << "class id " << c << " outside the L_none range; ";
            }
        }
        why << classes.size() << " of 8 classes found";
        if (classes.size() < 4) {
            ok = false;
            why << "; below the floor of 4";
        }

        // Scanner settings admit at most 9 ids; check every cached run.
        for (const char* tag : {"rlmax", "rs", "rlacc", "rlacc_nostall"}) {
            fs::path dir = fs::path(g_out) / tag;
            if (!fs::exists(dir)) continue;
            for (const auto& r : load_runs(dir.string())) {
                RunSummary s = summarize_run(r);
                for (int c : s.classes_found) {
                    if (c < 0 || c > 8) {
                        ok = false;
                        why << "; class id " << c << " out of range in " << tag;
                    }
                }
            }
        }
    } catch (const std::exception& e) {
        ok = false;
        why << e.what();
    }
    report(8, "collision class diversity", ok, why.str());
}

// --- criterion 9: matrix integrity and report regeneration -----------------

void criterion_9() {
    bool ok = true;
    std::ostringstream why;
    try {
        ExperimentConfig defaults;
        auto matrix = build_matrix(defaults);
        size_t runs = matrix.size() * defaults.seeds.size();
        if (matrix.size() != 27 || runs != 81) {
            ok = false;
            why << "matrix schedules " << matrix.size() << " configs, " << runs << " runs; ";
        }

        ExperimentConfig cfg;
        cfg.algorithm = Algorithm::RS;
        cfg.seeds = {1, 2};
        cfg.episode_cap = 10;
        cfg.out_dir = (fs::path(g_out) / "c9_rs").string();
        bool done = run_complete(cfg, 1) && run_complete(cfg, 2);
        if (!done) run_experiment(cfg, /*resume=*/true);

        fs::path r1 = fs::path(g_out) / "c9_report_1";
        fs::path r2 = fs::path(g_out) / "c9_report_2";
        write_reports(load_runs(cfg.out_dir), r1.string());
        write_reports(load_runs(cfg.out_dir), r2.string());
        for (const char* name : {"collisions_by_config.csv", "classes_by_config.csv",
                                 "runtimes.csv", "hacking_metrics.csv"}) {
            if (slurp(r1 / name) != slurp(r2 / name)) {
                ok = false;
                why << name << " not bit-identical; ";
            }
        }
    } catch (const std::exception& e) {
        ok = false;
        why << e.what();
    }
    report(9, "matrix and report integrity", ok, why.str());
}

}  // namespace

int main(int argc, char** argv) {
    std::set<int> selected;
    for (int i = 1; i < argc; ++i) {
        std::string arg = argv[i];
        if (arg == "--out" && i + 1 < argc) {
            g_out = argv[++i];
        } else {
            selected.insert(std::atoi(arg.c_str()));
        }
    }
    fs::create_directories(g_out);
    auto want = [&](int id) { return selected.empty() || selected.count(id) > 0; };

    if (want(1)) criterion_1();
    if (want(2)) criterion_2();
    if (want(3)) criterion_3();
    if (want(4)) criterion_4();
    if (want(5)) criterion_5();
    if (want(6)) criterion_6();
    if (want(7)) criterion_7();
    if (want(8)) criterion_8();
    if (want(9)) criterion_9();

    if (g_failures > 0) {
        std::printf("%d criterion(s) failed\n", g_failures);
        return 1;
    }
    std::printf("all criteria passed\n");
    return 0;
}
