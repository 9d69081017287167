#pragma once

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "falsify/rl/policy.hpp"

namespace falsify {

struct PpoHyperparams {
    double gamma = 0.99;
    double gae_lambda = 0.95;
    double clip_epsilon = 0.2;
    double learning_rate = 3e-4;
    int epochs = 10;
    int batch_size = 2048;       // environment steps per update
    int minibatch_size = 256;
    double entropy_coef = 0.01;
    double value_coef = 0.5;
    double max_grad_norm = 0.5;
};

// On-policy rollout storage. done marks the end of an episode segment;
// next_value is the bootstrap target for the successor state (0 at true
// terminals, V(s') at truncations and within-segment steps).
struct TransitionBatch {
    std::vector<std::vector<double>> observations;
    std::vector<std::array<double, 2>> z;  // pre-squash action points
    std::vector<double> log_probs;
    std::vector<double> rewards;
    std::vector<uint8_t> done;
    std::vector<double> values;
    std::vector<double> next_values;
    std::vector<double> advantages;
    std::vector<double> returns;

    size_t size() const { return rewards.size(); }
    void clear() {
        observations.clear();
        z.clear();
        log_probs.clear();
        rewards.clear();
        done.clear();
        values.clear();
        next_values.clear();
        advantages.clear();
        returns.clear();
    }
};

// Generalized advantage estimation; the recursion resets at segment ends.
inline void compute_gae(TransitionBatch& batch, double gamma, double lambda) {
    size_t n = batch.size();
    batch.advantages.assign(n, 0.0);
    batch.returns.assign(n, 0.0);
    double acc = 0.0;
    for (size_t i = n; i-- > 0;) {
        double delta = batch.rewards[i] + gamma * batch.next_values[i] - batch.values[i];
        acc = batch.done[i] ? delta : delta + gamma * lambda * acc;
        batch.advantages[i] = acc;
        batch.returns[i] = acc + batch.values[i];
    }
}

namespace detail {

inline double grad_norm(const std::vector<double>& g) {
    double s = 0.0;
    for (double v : g) s += v * v;
    return std::sqrt(s);
}

}  // namespace detail

struct PpoLosses {
    double actor_loss = 0.0;   // clipped surrogate minus entropy bonus
    double critic_loss = 0.0;  // weighted squared error against returns
};

// Mean loss and parameter gradients over the index set. adv holds the
// batch-normalized advantages. Shared by ppo_update and the gradient checks.
inline PpoLosses ppo_minibatch_grads(const PolicyParams& params, const TransitionBatch& batch,
                                     const std::vector<double>& adv, const PpoHyperparams& hp,
                                     const std::vector<size_t>& indices, size_t start, size_t end,
                                     Mlp::Grads& actor_g, Mlp::Grads& critic_g) {
    ActionScaling scaling = ActionScaling::standard();
    static thread_local Mlp::Workspace actor_ws, critic_ws;
    double inv_mb = 1.0 / static_cast<double>(end - start);
    PpoLosses losses;

    for (size_t oi = start; oi < end; ++oi) {
        size_t i = indices[oi];
        const auto& obs = batch.observations[i];

        // Actor: clipped surrogate plus Gaussian entropy bonus.
        const auto& out = params.actor.forward(obs, actor_ws);
        double dmu[kActionDim], dls[kActionDim];
        double logp = 0.0, entropy = 0.0;
        for (int d = 0; d < kActionDim; ++d) {
            double ls = clamp_log_std(out[kActionDim + d]);
            double sd_d = std::exp(ls);
            double u = (batch.z[i][d] - out[d]) / sd_d;
            logp += -0.5 * u * u - ls - 0.5 * std::log(2.0 * M_PI);
            logp -= log_one_minus_tanh_sq(batch.z[i][d]);
            logp -= std::log(scaling.half[d]);
            entropy += ls + 0.5 * std::log(2.0 * M_PI * std::exp(1.0));
            dmu[d] = u / sd_d;       // dlogp/dmean
            dls[d] = u * u - 1.0;    // dlogp/dlog_std
        }
        double ratio = std::exp(logp - batch.log_probs[i]);
        double unclipped = ratio * adv[i];
        double clipped = std::clamp(ratio, 1.0 - hp.clip_epsilon,
                                    1.0 + hp.clip_epsilon) * adv[i];
        double surrogate = std::min(unclipped, clipped);
        losses.actor_loss += (-surrogate - hp.entropy_coef * entropy) * inv_mb;
        double dsurr_dlogp = unclipped <= clipped ? -ratio * adv[i] : 0.0;

        std::vector<double> dy(2 * kActionDim, 0.0);
        for (int d = 0; d < kActionDim; ++d) {
            double raw = out[kActionDim + d];
            bool in_range = raw > kLogStdMin && raw < kLogStdMax;
            dy[d] = dsurr_dlogp * dmu[d] * inv_mb;
            double g = dsurr_dlogp * dls[d] - hp.entropy_coef;
            dy[kActionDim + d] = in_range ? g * inv_mb : 0.0;
        }
        params.actor.backward(actor_ws, dy, actor_g);

        // Critic: squared error against the GAE returns.
        double v = params.critic.forward(obs, critic_ws)[0];
        double err = v - batch.returns[i];
        losses.critic_loss += 0.5 * hp.value_coef * err * err * inv_mb;
        std::vector<double> dv{hp.value_coef * err * inv_mb};
        params.critic.backward(critic_ws, dv, critic_g);
    }
    return losses;
}

// Advantages normalized to mean 0, stddev 1 over the batch.
inline std::vector<double> normalized_advantages(const TransitionBatch& batch) {
    size_t n = batch.size();
    double mean = std::accumulate(batch.advantages.begin(), batch.advantages.end(), 0.0) / n;
    double var = 0.0;
    for (double a : batch.advantages) var += (a - mean) * (a - mean);
    double sd = std::sqrt(var / n) + 1e-8;
    std::vector<double> adv(n);
    for (size_t i = 0; i < n; ++i) adv[i] = (batch.advantages[i] - mean) / sd;
    return adv;
}

// Clipped-surrogate PPO update over the batch. The Adam state is external so
// it survives across updates.
inline void ppo_update(PolicyParams& params, TransitionBatch& batch,
                       const PpoHyperparams& hp, AdamOptimizer& adam, Rng& rng) {
    size_t n = batch.size();
    if (n == 0) return;

    std::vector<double> adv = normalized_advantages(batch);
    Mlp::Grads actor_g = params.actor.make_grads();
    Mlp::Grads critic_g = params.critic.make_grads();

    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 0; epoch < hp.epochs; ++epoch) {
        rng.shuffle(order);
        for (size_t start = 0; start < n; start += hp.minibatch_size) {
            size_t end = std::min(n, start + hp.minibatch_size);
            actor_g.zero();
            critic_g.zero();
            ppo_minibatch_grads(params, batch, adv, hp, order, start, end, actor_g, critic_g);

            std::vector<double> g = flatten_grads(actor_g);
            std::vector<double> gc = flatten_grads(critic_g);
            g.insert(g.end(), gc.begin(), gc.end());
            for (double v : g) {
                if (!std::isfinite(v)) throw std::runtime_error("ppo_update: non-finite gradient");
            }
            double norm = detail::grad_norm(g);
            if (norm > hp.max_grad_norm) {
                double s = hp.max_grad_norm / norm;
                for (double& v : g) v *= s;
            }

            std::vector<double> p = params.actor.flatten();
            std::vector<double> pc = params.critic.flatten();
            size_t na = p.size();
            p.insert(p.end(), pc.begin(), pc.end());
            adam.step(p, g);
            params.actor.unflatten(std::vector<double>(p.begin(), p.begin() + na));
            params.critic.unflatten(std::vector<double>(p.begin() + na, p.end()));
        }
    }
}

}  // namespace falsify
