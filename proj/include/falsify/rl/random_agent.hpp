#pragma once

#include "falsify/rl/rng.hpp"
#include "falsify/sim/world.hpp"

namespace falsify {

// Uniform action sampling with static-obstacle masking: rejected samples are
// redrawn, and a boxed-in human falls back to standing still.
inline HumanAction random_act(const WorldState& state, const StaticMap& map, Rng& rng,
                              double dt, int max_tries = 100) {
    for (int i = 0; i < max_tries; ++i) {
        HumanAction a{rng.uniform(HumanAction::speed_min(), HumanAction::speed_max()),
                      rng.uniform(HumanAction::turn_min(), HumanAction::turn_max())};
        if (mask_static_collision(state, a, map, dt)) return a;
    }
    return HumanAction{0.0, 0.0};
}

}  // namespace falsify
