#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "falsify/rl/mlp.hpp"
#include "falsify/rl/observation.hpp"
#include "falsify/rl/rng.hpp"
#include "falsify/sim/action.hpp"

namespace falsify {

inline constexpr int kActionDim = 2;
inline constexpr double kLogStdMin = -5.0;
inline constexpr double kLogStdMax = 1.0;

// Affine map between the tanh-squashed unit interval and the action bounds.
struct ActionScaling {
    std::array<double, 2> mid;
    std::array<double, 2> half;

    static ActionScaling standard() {
        ActionScaling s;
        s.mid = {(HumanAction::speed_min() + HumanAction::speed_max()) / 2.0,
                 (HumanAction::turn_min() + HumanAction::turn_max()) / 2.0};
        s.half = {(HumanAction::speed_max() - HumanAction::speed_min()) / 2.0,
                  (HumanAction::turn_max() - HumanAction::turn_min()) / 2.0};
        return s;
    }
};

// Actor outputs 2 means and 2 log-stddevs; critic outputs a scalar value.
struct PolicyParams {
    Mlp actor{{kObservationDim, 64, 64, 2 * kActionDim}};
    Mlp critic{{kObservationDim, 64, 64, 1}};

    static PolicyParams random(uint64_t seed) {
        PolicyParams p;
        Rng rng(seed);
        p.actor.init_random(rng);
        p.critic.init_random(rng);
        return p;
    }
};

inline double clamp_log_std(double ls) {
    return std::clamp(ls, kLogStdMin, kLogStdMax);
}

// log(1 - tanh(z)^2), evaluated stably.
inline double log_one_minus_tanh_sq(double z) {
    return 2.0 * (std::log(2.0) - z - std::log1p(std::exp(-2.0 * z)));
}

struct ActionSample {
    HumanAction action;
    std::array<double, 2> z;  // pre-squash Gaussian sample
    double log_prob = 0.0;
};

// Log-density of the squashed, affinely scaled action at pre-squash point z
// under the Gaussian (mean, log_std), including the change-of-variables terms.
inline double squashed_log_prob(const std::array<double, 2>& z,
                                const std::array<double, 2>& mean,
                                const std::array<double, 2>& log_std,
                                const ActionScaling& scaling) {
    double lp = 0.0;
    for (int i = 0; i < kActionDim; ++i) {
        double ls = clamp_log_std(log_std[i]);
        double sd = std::exp(ls);
        double u = (z[i] - mean[i]) / sd;
        lp += -0.5 * u * u - ls - 0.5 * std::log(2.0 * M_PI);
        lp -= log_one_minus_tanh_sq(z[i]);
        lp -= std::log(scaling.half[i]);
    }
    return lp;
}

// Samples an action (or takes the mean when deterministic) and reports the
// log-probability and the pre-squash point needed for later updates.
inline ActionSample policy_act(const PolicyParams& params, const std::vector<double>& obs,
                               Rng& rng, bool stochastic) {
    static thread_local Mlp::Workspace ws;
    const auto& out = params.actor.forward(obs, ws);
    std::array<double, 2> mean{out[0], out[1]};
    std::array<double, 2> log_std{clamp_log_std(out[2]), clamp_log_std(out[3])};
    ActionScaling scaling = ActionScaling::standard();

    ActionSample s;
    for (int i = 0; i < kActionDim; ++i) {
        double z = stochastic ? mean[i] + std::exp(log_std[i]) * rng.normal() : mean[i];
        s.z[i] = z;
    }
    s.log_prob = squashed_log_prob(s.z, mean, log_std, scaling);
    s.action = HumanAction{scaling.mid[0] + scaling.half[0] * std::tanh(s.z[0]),
                           scaling.mid[1] + scaling.half[1] * std::tanh(s.z[1])};
    return s;
}

inline double critic_value(const PolicyParams& params, const std::vector<double>& obs) {
    static thread_local Mlp::Workspace ws;
    return params.critic.forward(obs, ws)[0];
}

}  // namespace falsify
