// Copyright 2026 The qvcopt Authors.

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/**
 * @file
 * Soft Actor-Critic: a squashed-Gaussian policy, twin Q networks with twin
 * Polyak-averaged targets, automatic temperature adjustment, a uniform replay
 * buffer, and the off-policy training loop.
 *
 * The agent is five networks: policy, q1, q2 and their targets. Actions are
 * rotation angles, squashed to [-pi, pi] by a scaled tanh; log-probabilities
 * carry the tanh-Jacobian correction.
 */

#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qvcopt/nn.hpp"
#include "qvcopt/rng.hpp"

namespace qvcopt {

struct SacConfig {
    double gamma = 0.99;
    double tau = 0.005;
    double lr = 3e-4;           // policy, Q, and temperature optimizers
    std::size_t hidden = 256;   // width of the two hidden layers
    std::size_t batch_size = 256;
    std::size_t buffer_capacity = 100'000;
    std::size_t warmup_steps = 1'000;
    int updates_per_step = 1;
    double action_scale = std::numbers::pi;
    double log_std_min = -20.0;
    double log_std_max = 2.0;
    double init_alpha = 1.0;
    std::optional<double> target_entropy; // defaults to -action_dim
};

struct Transition {
    Tensor state;
    std::vector<double> action;
    double reward = 0.0;
    Tensor next_state;
    bool done = false;
};

/// Ring buffer with uniform batch sampling (no repeats within one batch).
class ReplayBuffer {
  public:
    explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
        if (capacity == 0) throw std::invalid_argument("replay buffer: capacity 0");
    }

    void push(Transition t) {
        if (storage_.size() < capacity_) {
            storage_.push_back(std::move(t));
        } else {
            storage_[next_] = std::move(t);
        }
        next_ = (next_ + 1) % capacity_;
    }

    std::size_t size() const { return storage_.size(); }
    std::size_t capacity() const { return capacity_; }
    const Transition &operator[](std::size_t i) const { return storage_[i]; }

    /// Floyd's sampling: `count` distinct indices, uniform over the buffer.
    std::vector<std::size_t> sample_indices(std::size_t count, Rng &rng) const {
        if (count > storage_.size())
            throw std::invalid_argument("replay buffer: batch larger than buffer");
        std::vector<std::size_t> picked;
        picked.reserve(count);
        for (std::size_t i = storage_.size() - count; i < storage_.size(); ++i) {
            const std::size_t j = rng.uniform_int(i + 1);
            if (std::find(picked.begin(), picked.end(), j) != picked.end())
                picked.push_back(i);
            else
                picked.push_back(j);
        }
        return picked;
    }

  private:
    std::size_t capacity_;
    std::size_t next_ = 0;
    std::vector<Transition> storage_;
};

struct ActionSample {
    std::vector<double> action;
    double log_prob = 0.0;
};

namespace detail {

inline double softplus(double x) {
    return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

/// log(1 - tanh(u)^2), stable for |u| >> 1.
inline double log1m_tanh_sq(double u) {
    return 2.0 * (std::numbers::ln2 - u - softplus(-2.0 * u));
}

constexpr double kHalfLog2Pi = 0.9189385332046727; // 0.5 * log(2 pi)

} // namespace detail

/**
 * Q network: an optional state encoder (the CNN trunk) followed by a dense
 * head on [encoded state, action]. The MLP agent uses no encoder; the state
 * row feeds the head directly.
 */
struct QNetwork {
    std::optional<Network> encoder;
    Network head;

    std::size_t n_params() const {
        return head.n_params() + (encoder ? encoder->n_params() : 0);
    }

    template <class Fn> void for_each_param_block(Fn &&fn) {
        if (encoder) fn(encoder->params());
        fn(head.params());
    }
    template <class Fn> void for_each_param_block(Fn &&fn) const {
        if (encoder) fn(encoder->params());
        fn(head.params());
    }
};

/// Work buffers from one batched Q forward pass.
struct QForward {
    ForwardCache encoder_cache;
    ForwardCache head_cache;
    Tensor head_input; // [B, enc + A]
    Tensor values;     // [B, 1]
};

class SacAgent {
  public:
    SacAgent(std::vector<std::size_t> obs_shape, std::size_t action_dim,
             const SacConfig &config, Rng init_rng, bool convolutional = false)
        : cfg_(config), obs_shape_(std::move(obs_shape)), action_dim_(action_dim),
          log_alpha_(std::log(config.init_alpha)),
          target_entropy_(config.target_entropy
                              ? *config.target_entropy
                              : -static_cast<double>(action_dim)),
          rng_(init_rng.stream("sac-agent")) {
        Rng wrng = init_rng.stream("weights");
        const std::size_t h = cfg_.hidden;
        if (convolutional) {
            if (obs_shape_.size() != 3)
                throw std::invalid_argument("sac: CNN agent needs a 3-D observation");
            const std::size_t ch = obs_shape_[0];
            const std::size_t oh = obs_shape_[1] - 4, ow = obs_shape_[2] - 4;
            const std::size_t flat = 32 * oh * ow;
            auto encoder_layers = [&]() {
                return std::vector<LayerSpec>{
                    Conv2DSpec{ch, 16, 3, 1, Activation::ReLU},
                    Conv2DSpec{16, 32, 3, 1, Activation::ReLU}, FlattenSpec{},
                    DenseSpec{flat, h, Activation::ReLU}};
            };
            auto policy_layers = encoder_layers();
            policy_layers.push_back(DenseSpec{h, h, Activation::ReLU});
            policy_layers.push_back(DenseSpec{h, 2 * action_dim_, Activation::Linear});
            policy_ = Network(obs_shape_, policy_layers, wrng);
            auto make_q = [&]() {
                QNetwork q;
                q.encoder = Network(obs_shape_, encoder_layers(), wrng);
                q.head = Network({h + action_dim_},
                                 {DenseSpec{h + action_dim_, h, Activation::ReLU},
                                  DenseSpec{h, 1, Activation::Linear}},
                                 wrng);
                return q;
            };
            q1_ = make_q();
            q2_ = make_q();
        } else {
            const std::size_t flat =
                std::accumulate(obs_shape_.begin(), obs_shape_.end(), std::size_t{1},
                                std::multiplies<>());
            flat_obs_ = flat;
            policy_ = Network({flat},
                              {DenseSpec{flat, h, Activation::ReLU},
                               DenseSpec{h, h, Activation::ReLU},
                               DenseSpec{h, 2 * action_dim_, Activation::Linear}},
                              wrng);
            auto make_q = [&]() {
                QNetwork q;
                q.head = Network({flat + action_dim_},
                                 {DenseSpec{flat + action_dim_, h, Activation::ReLU},
                                  DenseSpec{h, h, Activation::ReLU},
                                  DenseSpec{h, 1, Activation::Linear}},
                                 wrng);
                return q;
            };
            q1_ = make_q();
            q2_ = make_q();
        }
        convolutional_ = convolutional;
        q1_target_ = q1_;
        q2_target_ = q2_;
        policy_opt_ = AdamState(policy_.n_params(), cfg_.lr);
        q1_opt_ = AdamState(q1_.n_params(), cfg_.lr);
        q2_opt_ = AdamState(q2_.n_params(), cfg_.lr);
        alpha_opt_ = AdamState(1, cfg_.lr);
    }

    const SacConfig &config() const { return cfg_; }
    std::size_t action_dim() const { return action_dim_; }
    const std::vector<std::size_t> &obs_shape() const { return obs_shape_; }
    bool convolutional() const { return convolutional_; }
    double alpha() const { return std::exp(log_alpha_); }
    double target_entropy() const { return target_entropy_; }

    Network &policy() { return policy_; }
    QNetwork &q1() { return q1_; }
    QNetwork &q2() { return q2_; }
    QNetwork &q1_target() { return q1_target_; }
    QNetwork &q2_target() { return q2_target_; }
    AdamState &policy_opt() { return policy_opt_; }
    AdamState &q1_opt() { return q1_opt_; }
    AdamState &q2_opt() { return q2_opt_; }
    AdamState &alpha_opt() { return alpha_opt_; }
    double &log_alpha() { return log_alpha_; }
    Rng &rng() { return rng_; }

    const Network &policy() const { return policy_; }
    const QNetwork &q1() const { return q1_; }
    const QNetwork &q2() const { return q2_; }
    const QNetwork &q1_target() const { return q1_target_; }
    const QNetwork &q2_target() const { return q2_target_; }
    const AdamState &policy_opt() const { return policy_opt_; }
    const AdamState &q1_opt() const { return q1_opt_; }
    const AdamState &q2_opt() const { return q2_opt_; }
    const AdamState &alpha_opt() const { return alpha_opt_; }
    double log_alpha() const { return log_alpha_; }
    const Rng &rng() const { return rng_; }

    /**
     * Draws an action for one observation. Stochastic mode returns
     * a = scale * tanh(mu + sigma * eps) and its log-probability including
     * the squash correction; deterministic mode returns scale * tanh(mu).
     */
    ActionSample sample_action(const Tensor &obs, bool deterministic = false) {
        Tensor batched = obs;
        batched.shape = policy_input_shape(1);
        const Tensor out = policy_.forward(batched);
        ActionSample result;
        result.action.resize(action_dim_);
        for (std::size_t i = 0; i < action_dim_; ++i) {
            const double mu = out.data[i];
            double log_std = out.data[action_dim_ + i];
            if (!std::isfinite(mu) || !std::isfinite(log_std))
                throw std::runtime_error("sac: non-finite policy output (divergence)");
            log_std = std::clamp(log_std, cfg_.log_std_min, cfg_.log_std_max);
            if (deterministic) {
                result.action[i] = cfg_.action_scale * std::tanh(mu);
                continue;
            }
            const double eps = rng_.normal();
            const double u = mu + std::exp(log_std) * eps;
            result.action[i] = cfg_.action_scale * std::tanh(u);
            result.log_prob += -0.5 * eps * eps - log_std - detail::kHalfLog2Pi -
                               std::log(cfg_.action_scale) - detail::log1m_tanh_sq(u);
        }
        return result;
    }

    struct Batch {
        Tensor states;      // [B, obs...]
        Tensor next_states; // [B, obs...]
        Tensor actions;     // [B, A]
        std::vector<double> rewards;
        std::vector<std::uint8_t> done;
        std::size_t size() const { return rewards.size(); }
    };

    Batch assemble(const ReplayBuffer &buffer, std::span<const std::size_t> idx) const {
        Batch b;
        const std::size_t B = idx.size();
        std::vector<std::size_t> obs_batch_shape{B};
        obs_batch_shape.insert(obs_batch_shape.end(), obs_shape_.begin(), obs_shape_.end());
        b.states = Tensor(obs_batch_shape);
        b.next_states = Tensor(obs_batch_shape);
        b.actions = Tensor({B, action_dim_});
        b.rewards.resize(B);
        b.done.resize(B);
        const std::size_t row = b.states.row_size();
        for (std::size_t k = 0; k < B; ++k) {
            const Transition &t = buffer[idx[k]];
            std::copy(t.state.data.begin(), t.state.data.end(),
                      b.states.data.begin() + static_cast<std::ptrdiff_t>(k * row));
            std::copy(t.next_state.data.begin(), t.next_state.data.end(),
                      b.next_states.data.begin() + static_cast<std::ptrdiff_t>(k * row));
            std::copy(t.action.begin(), t.action.end(),
                      b.actions.data.begin() + static_cast<std::ptrdiff_t>(k * action_dim_));
            b.rewards[k] = t.reward;
            b.done[k] = t.done ? 1 : 0;
        }
        return b;
    }

    /**
     * Soft Bellman regression of both Q networks toward
     * y = r + gamma (1 - done) (min target Q(s', a') - alpha log pi(a'|s')),
     * one Adam step each; returns the mean of the two MSE losses.
     */
    double critic_update(const Batch &batch) {
        const std::size_t B = batch.size();
        if (B == 0) throw std::invalid_argument("critic_update: empty batch");

        PolicySample next = sample_policy_batch(batch.next_states);
        const QForward q1t = q_forward(q1_target_, batch.next_states, next.actions);
        const QForward q2t = q_forward(q2_target_, batch.next_states, next.actions);

        std::vector<double> target(B);
        const double alpha = this->alpha();
        for (std::size_t k = 0; k < B; ++k) {
            const double min_q = std::min(q1t.values.data[k], q2t.values.data[k]);
            target[k] = batch.rewards[k] +
                        cfg_.gamma * (batch.done[k] ? 0.0 : 1.0) *
                            (min_q - alpha * next.log_probs[k]);
        }

        const double loss1 = critic_regress(q1_, q1_opt_, batch, target);
        const double loss2 = critic_regress(q2_, q2_opt_, batch, target);
        const double loss = 0.5 * (loss1 + loss2);
        if (!std::isfinite(loss))
            throw std::runtime_error("sac: non-finite critic loss (divergence)");
        return loss;
    }

    /**
     * Reparameterized policy objective E[alpha log pi(a|s) - min Q(s, a)] and
     * its gradient w.r.t. the policy parameters (Q networks frozen). Exposed
     * so the gradient can be checked against finite differences.
     */
    std::pair<double, std::vector<double>> actor_objective_and_grad(const Batch &batch) {
        const std::size_t B = batch.size();
        if (B == 0) throw std::invalid_argument("actor_update: empty batch");
        const double alpha = this->alpha();

        PolicySample cur = sample_policy_batch(batch.states, /*keep_cache=*/true);
        QForward qf1 = q_forward(q1_, batch.states, cur.actions, /*keep_cache=*/true);
        QForward qf2 = q_forward(q2_, batch.states, cur.actions, /*keep_cache=*/true);

        double objective = 0.0;
        // dJ/dQ_min = -1/B, routed per sample to whichever net attains the min.
        Tensor dq1({B, 1}), dq2({B, 1});
        for (std::size_t k = 0; k < B; ++k) {
            const double v1 = qf1.values.data[k];
            const double v2 = qf2.values.data[k];
            objective += alpha * cur.log_probs[k] - std::min(v1, v2);
            (v1 <= v2 ? dq1 : dq2).data[k] = -1.0 / static_cast<double>(B);
        }
        objective /= static_cast<double>(B);

        // Q input gradients w.r.t. the action (weights stay frozen: gradients
        // land in scratch buffers that are dropped).
        Tensor daction({B, action_dim_});
        q_input_action_grad(q1_, qf1, dq1, daction);
        q_input_action_grad(q2_, qf2, dq2, daction);

        // Assemble d objective / d (mu, log_std) per element.
        Tensor dout({B, 2 * action_dim_});
        const double inv_b = 1.0 / static_cast<double>(B);
        for (std::size_t k = 0; k < B; ++k) {
            for (std::size_t i = 0; i < action_dim_; ++i) {
                const std::size_t e = k * action_dim_ + i;
                const double t = cur.tanh_u[e];
                const double du = alpha * inv_b * 2.0 * t +
                                  daction.data[e] * cfg_.action_scale * (1.0 - t * t);
                dout.data[k * 2 * action_dim_ + i] = du;
                double dls = du * cur.sigmas[e] * cur.eps[e] - alpha * inv_b;
                if (cur.clamped[e]) dls = 0.0;
                dout.data[k * 2 * action_dim_ + action_dim_ + i] = dls;
            }
        }

        std::vector<double> grads(policy_.n_params(), 0.0);
        policy_.backward(cur.cache, dout, grads);

        if (!std::isfinite(objective))
            throw std::runtime_error("sac: non-finite actor loss (divergence)");
        last_mean_log_prob_ = cur.mean_log_prob;
        return {objective, std::move(grads)};
    }

    /// One Adam step on the policy; returns the objective value.
    double actor_update(const Batch &batch) {
        auto [objective, grads] = actor_objective_and_grad(batch);
        adam_update(policy_opt_, policy_.params(), grads);
        return objective;
    }

    /**
     * One Adam step on log alpha minimizing
     * E[-log_alpha * (log pi(a|s) + target_entropy)].
     */
    double temperature_update(const Batch &batch) {
        const PolicySample cur = sample_policy_batch(batch.states);
        return temperature_step(cur.mean_log_prob);
    }

    /// theta_target <- tau * theta + (1 - tau) * theta_target, both targets.
    void polyak_update(double tau) {
        if (tau <= 0.0 || tau > 1.0)
            throw std::invalid_argument("polyak_update: tau outside (0, 1]");
        polyak_pair(q1_, q1_target_, tau);
        polyak_pair(q2_, q2_target_, tau);
    }

    /// critic + actor + temperature + Polyak, sharing the actor's log pi for
    /// the temperature step (the standard fused update).
    struct UpdateStats {
        double q_loss = 0.0;
        double pi_loss = 0.0;
        double alpha = 0.0;
    };
    UpdateStats update(const Batch &batch) {
        UpdateStats s;
        s.q_loss = critic_update(batch);
        s.pi_loss = actor_update(batch);
        temperature_step(last_mean_log_prob_);
        polyak_update(cfg_.tau);
        s.alpha = alpha();
        return s;
    }

  private:
    struct PolicySample {
        Tensor actions; // [B, A], squashed
        std::vector<double> log_probs;
        std::vector<double> tanh_u, sigmas, eps;
        std::vector<std::uint8_t> clamped;
        double mean_log_prob = 0.0;
        ForwardCache cache;
    };

    std::vector<std::size_t> policy_input_shape(std::size_t batch) const {
        if (convolutional_) {
            std::vector<std::size_t> s{batch};
            s.insert(s.end(), obs_shape_.begin(), obs_shape_.end());
            return s;
        }
        return {batch, flat_obs_};
    }

    PolicySample sample_policy_batch(const Tensor &states, bool keep_cache = false) {
        const std::size_t B = states.batch();
        Tensor input = states;
        input.shape = policy_input_shape(B);
        PolicySample out;
        const Tensor net_out =
            keep_cache ? policy_.forward(input, &out.cache) : policy_.forward(input);
        out.actions = Tensor({B, action_dim_});
        out.log_probs.assign(B, 0.0);
        out.tanh_u.resize(B * action_dim_);
        out.sigmas.resize(B * action_dim_);
        out.eps.resize(B * action_dim_);
        out.clamped.resize(B * action_dim_);
        for (std::size_t k = 0; k < B; ++k) {
            for (std::size_t i = 0; i < action_dim_; ++i) {
                const std::size_t e = k * action_dim_ + i;
                const double mu = net_out.data[k * 2 * action_dim_ + i];
                const double raw_ls = net_out.data[k * 2 * action_dim_ + action_dim_ + i];
                if (!std::isfinite(mu) || !std::isfinite(raw_ls))
                    throw std::runtime_error("sac: non-finite policy output (divergence)");
                const double ls = std::clamp(raw_ls, cfg_.log_std_min, cfg_.log_std_max);
                out.clamped[e] = (raw_ls != ls) ? 1 : 0;
                const double sigma = std::exp(ls);
                const double eps = rng_.normal();
                const double u = mu + sigma * eps;
                out.sigmas[e] = sigma;
                out.eps[e] = eps;
                out.tanh_u[e] = std::tanh(u);
                out.actions.data[e] = cfg_.action_scale * out.tanh_u[e];
                out.log_probs[k] += -0.5 * eps * eps - ls - detail::kHalfLog2Pi -
                                    std::log(cfg_.action_scale) -
                                    detail::log1m_tanh_sq(u);
            }
            out.mean_log_prob += out.log_probs[k];
        }
        out.mean_log_prob /= static_cast<double>(B);
        return out;
    }

    QForward q_forward(QNetwork &q, const Tensor &states, const Tensor &actions,
                       bool keep_cache = false) {
        const std::size_t B = states.batch();
        QForward f;
        Tensor encoded;
        if (q.encoder) {
            Tensor input = states;
            encoded = keep_cache ? q.encoder->forward(input, &f.encoder_cache)
                                 : q.encoder->forward(input);
        } else {
            encoded = states;
            encoded.shape = {B, flat_obs_};
        }
        const std::size_t enc = encoded.row_size();
        f.head_input = Tensor({B, enc + action_dim_});
        for (std::size_t k = 0; k < B; ++k) {
            std::copy(encoded.data.begin() + static_cast<std::ptrdiff_t>(k * enc),
                      encoded.data.begin() + static_cast<std::ptrdiff_t>((k + 1) * enc),
                      f.head_input.data.begin() +
                          static_cast<std::ptrdiff_t>(k * (enc + action_dim_)));
            std::copy(actions.data.begin() + static_cast<std::ptrdiff_t>(k * action_dim_),
                      actions.data.begin() +
                          static_cast<std::ptrdiff_t>((k + 1) * action_dim_),
                      f.head_input.data.begin() +
                          static_cast<std::ptrdiff_t>(k * (enc + action_dim_) + enc));
        }
        f.values = keep_cache ? q.head.forward(f.head_input, &f.head_cache)
                              : q.head.forward(f.head_input);
        return f;
    }

    /// Adds dJ/d(action input) of a frozen Q network into `daction`.
    void q_input_action_grad(QNetwork &q, const QForward &f, const Tensor &dvalues,
                             Tensor &daction) {
        std::vector<double> scratch(q.head.n_params(), 0.0);
        const Tensor dinput = q.head.backward(f.head_cache, dvalues, scratch);
        const std::size_t B = dvalues.batch();
        const std::size_t enc = dinput.row_size() - action_dim_;
        for (std::size_t k = 0; k < B; ++k)
            for (std::size_t i = 0; i < action_dim_; ++i)
                daction.data[k * action_dim_ + i] +=
                    dinput.data[k * (enc + action_dim_) + enc + i];
    }

    double critic_regress(QNetwork &q, AdamState &opt, const Batch &batch,
                          std::span<const double> target) {
        const std::size_t B = batch.size();
        QForward f = q_forward(q, batch.states, batch.actions, /*keep_cache=*/true);
        double loss = 0.0;
        Tensor dvalues({B, 1});
        for (std::size_t k = 0; k < B; ++k) {
            const double err = f.values.data[k] - target[k];
            loss += err * err;
            dvalues.data[k] = 2.0 * err / static_cast<double>(B);
        }
        loss /= static_cast<double>(B);

        std::vector<double> grads(q.n_params(), 0.0);
        const std::size_t enc_params = q.encoder ? q.encoder->n_params() : 0;
        const Tensor dinput = q.head.backward(
            f.head_cache, dvalues,
            std::span<double>(grads.data() + enc_params, q.head.n_params()));
        if (q.encoder) {
            const std::size_t enc = dinput.row_size() - action_dim_;
            Tensor denc({B, enc});
            for (std::size_t k = 0; k < B; ++k)
                std::copy(dinput.data.begin() +
                              static_cast<std::ptrdiff_t>(k * (enc + action_dim_)),
                          dinput.data.begin() +
                              static_cast<std::ptrdiff_t>(k * (enc + action_dim_) + enc),
                          denc.data.begin() + static_cast<std::ptrdiff_t>(k * enc));
            q.encoder->backward(f.encoder_cache, denc,
                                std::span<double>(grads.data(), enc_params));
        }
        // One Adam state spans encoder + head parameter blocks.
        std::vector<double *> blocks;
        std::size_t off = 0;
        q.for_each_param_block([&](std::span<double> p) {
            adam_span(opt, off, p, std::span<const double>(grads.data() + off, p.size()));
            off += p.size();
        });
        ++opt.step;
        return loss;
    }

    /// Adam over a sub-range of the optimizer state (encoder/head blocks).
    void adam_span(AdamState &st, std::size_t offset, std::span<double> params,
                   std::span<const double> grads) {
        const double step = static_cast<double>(st.step + 1);
        const double bc1 = 1.0 - std::pow(st.beta1, step);
        const double bc2 = 1.0 - std::pow(st.beta2, step);
        for (std::size_t i = 0; i < params.size(); ++i) {
            const std::size_t j = offset + i;
            st.m[j] = st.beta1 * st.m[j] + (1.0 - st.beta1) * grads[i];
            st.v[j] = st.beta2 * st.v[j] + (1.0 - st.beta2) * grads[i] * grads[i];
            params[i] -= st.lr * (st.m[j] / bc1) / (std::sqrt(st.v[j] / bc2) + st.eps);
        }
    }

    double temperature_step(double mean_log_prob) {
        const double grad = -(mean_log_prob + target_entropy_);
        std::vector<double> value{log_alpha_};
        adam_update(alpha_opt_, value, std::vector<double>{grad});
        log_alpha_ = value[0];
        return alpha();
    }

    static void polyak_pair(const QNetwork &online, QNetwork &target, double tau) {
        auto blend = [tau](std::span<const double> src, std::span<double> dst) {
            for (std::size_t i = 0; i < src.size(); ++i)
                dst[i] = tau * src[i] + (1.0 - tau) * dst[i];
        };
        if (online.encoder) blend(online.encoder->params(), target.encoder->params());
        blend(online.head.params(), target.head.params());
    }

    SacConfig cfg_;
    std::vector<std::size_t> obs_shape_;
    std::size_t action_dim_;
    std::size_t flat_obs_ = 0;
    bool convolutional_ = false;
    Network policy_;
    QNetwork q1_, q2_, q1_target_, q2_target_;
    AdamState policy_opt_, q1_opt_, q2_opt_, alpha_opt_;
    double log_alpha_;
    double target_entropy_;
    double last_mean_log_prob_ = 0.0;
    Rng rng_;
};

// ---------------------------------------------------------------------------
// Training loop
// ---------------------------------------------------------------------------

struct TrainConfig {
    std::size_t total_steps = 20'000;
    std::size_t eval_every = 0;        // deterministic eval cadence in steps (0 = off)
    double stop_eval_loss = -1.0;      // early stop once eval loss < this (< 0 = off)
    std::uint64_t seed = 0;            // warmup actions + replay sampling streams
};

struct EpisodeLog {
    std::size_t episode = 0;
    double episode_return = 0.0;
    double alpha = 0.0;
    double q_loss = 0.0;
    double pi_loss = 0.0;
};

struct TrainResult {
    std::vector<EpisodeLog> episodes;
    std::size_t steps_taken = 0;
    double final_eval_loss = std::numeric_limits<double>::quiet_NaN();
};

/// Runs one deterministic-policy episode on a copy of the environment;
/// returns {episode return, last-step loss (= -last reward)}.
template <class Env>
std::pair<double, double> evaluate_policy(SacAgent &agent, Env env) {
    Tensor obs = env.reset();
    double ret = 0.0, last = 0.0;
    for (;;) {
        const auto act = agent.sample_action(obs, /*deterministic=*/true);
        auto out = env.step(act.action);
        ret += out.reward;
        last = -out.reward;
        if (out.done) break;
        obs = std::move(out.obs);
    }
    return {ret, last};
}

/**
 * Standard off-policy loop: act, store, and after warmup run one fused
 * critic/actor/temperature/Polyak update per environment step.
 */
template <class Env>
TrainResult train(SacAgent &agent, Env &env, const TrainConfig &tc) {
    const SacConfig &cfg = agent.config();
    ReplayBuffer buffer(cfg.buffer_capacity);
    Rng warmup_rng = Rng::from_seed(tc.seed).stream("warmup-actions");
    Rng replay_rng = Rng::from_seed(tc.seed).stream("replay-sampling");

    TrainResult result;
    Tensor obs = env.reset();
    double episode_return = 0.0;
    double q_loss_acc = 0.0, pi_loss_acc = 0.0;
    std::size_t updates_in_episode = 0;

    for (std::size_t step = 0; step < tc.total_steps; ++step) {
        std::vector<double> action;
        if (step < cfg.warmup_steps) {
            action.resize(agent.action_dim());
            for (double &a : action)
                a = warmup_rng.uniform(-cfg.action_scale, cfg.action_scale);
        } else {
            action = agent.sample_action(obs, /*deterministic=*/false).action;
        }
        auto out = env.step(action);
        episode_return += out.reward;
        buffer.push(Transition{obs, action, out.reward, out.obs, out.done});
        obs = out.done ? env.reset() : std::move(out.obs);

        if (step >= cfg.warmup_steps && buffer.size() >= cfg.batch_size) {
            for (int u = 0; u < cfg.updates_per_step; ++u) {
                const auto idx = buffer.sample_indices(cfg.batch_size, replay_rng);
                const auto batch = agent.assemble(buffer, idx);
                const auto stats = agent.update(batch);
                q_loss_acc += stats.q_loss;
                pi_loss_acc += stats.pi_loss;
                ++updates_in_episode;
            }
        }

        if (out.done) {
            EpisodeLog log;
            log.episode = result.episodes.size();
            log.episode_return = episode_return;
            log.alpha = agent.alpha();
            log.q_loss = updates_in_episode ? q_loss_acc / double(updates_in_episode) : 0.0;
            log.pi_loss = updates_in_episode ? pi_loss_acc / double(updates_in_episode) : 0.0;
            result.episodes.push_back(log);
            episode_return = 0.0;
            q_loss_acc = pi_loss_acc = 0.0;
            updates_in_episode = 0;
        }

        if (tc.eval_every > 0 && step >= cfg.warmup_steps &&
            (step + 1) % tc.eval_every == 0) {
            const auto [ret, last] = evaluate_policy(agent, env);
            result.final_eval_loss = last;
            if (tc.stop_eval_loss >= 0.0 && last < tc.stop_eval_loss) {
                result.steps_taken = step + 1;
                return result;
            }
        }
    }
    result.steps_taken = tc.total_steps;
    return result;
}

} // namespace qvcopt
