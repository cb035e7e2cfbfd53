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
 * Deployment optimizers: Adam gradient descent on circuit parameters, the
 * greedy RL-augmented loop (per iteration, take the best of the gradient step
 * and the two agents' proposals), its rolling-gradient variant, and the
 * solo-agent mode.
 *
 * A Problem is anything with:
 *   std::size_t n_params() const;
 *   const Circuit &circuit() const;            // trainable skeleton
 *   void begin_iteration(int iter);            // fixes the data minibatch
 *   double loss(std::span<const double>);      // fresh noise per call
 *   std::vector<double> gradient(std::span<const double>, GradMethod);
 */

#pragma once

#include <array>
#include <chrono>
#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qvcopt/env.hpp"
#include "qvcopt/gradients.hpp"
#include "qvcopt/nn.hpp"
#include "qvcopt/sac.hpp"

namespace qvcopt {

enum class Branch { Gradient, MLP, CNN, RollingGradient };

constexpr const char *branch_name(Branch b) {
    switch (b) {
    case Branch::Gradient: return "gradient";
    case Branch::MLP: return "mlp";
    case Branch::CNN: return "cnn";
    case Branch::RollingGradient: return "rolling_gradient";
    }
    return "?";
}

struct OptStep {
    int iteration = 0;
    ParamVector theta;
    double loss = 0.0;
    Branch chosen = Branch::Gradient;
    double wall_ms = 0.0;
};

struct Trajectory {
    std::vector<OptStep> steps;
    std::array<std::size_t, 4> branch_counts{}; // indexed by Branch

    double final_loss() const { return steps.empty() ? 0.0 : steps.back().loss; }
};

struct OptimizerConfig {
    double lr = 0.01; // circuit-parameter Adam
    GradMethod grad_method = GradMethod::Auto;
    bool paired_candidates = false; // shared noise across candidate evaluations
};

/**
 * A parameter proposer joining the greedy selection: normally a trained agent
 * plus the observation grid it was trained on (proposals are deterministic
 * policy actions truncated to the problem's parameter count), but any
 * callable can stand in (reduction tests use identity stubs).
 */
struct AgentHandle {
    using Proposer =
        std::function<ParamVector(const Circuit &, std::span<const double>, double)>;

    ObsKind kind = ObsKind::Feature;
    Proposer proposer;
    std::function<bool(const Circuit &)> fits_fn;

    static AgentHandle from_agent(SacAgent *agent, EnvConfig grid, ObsKind kind) {
        AgentHandle h;
        h.kind = kind;
        h.fits_fn = [agent, grid](const Circuit &c) {
            return agent && c.n_qubits <= grid.max_qubits &&
                   c.n_params <= grid.max_params() &&
                   agent->action_dim() == static_cast<std::size_t>(grid.max_params());
        };
        h.proposer = [agent, grid, kind](const Circuit &c, std::span<const double> theta,
                                         double current_loss) {
            const Observations obs = external_error_feed(c, theta, current_loss, grid);
            const Tensor &input = kind == ObsKind::Feature ? obs.feature : obs.block;
            const auto sample = agent->sample_action(input, /*deterministic=*/true);
            return ParamVector(sample.action.begin(),
                               sample.action.begin() +
                                   static_cast<std::ptrdiff_t>(theta.size()));
        };
        return h;
    }

    static AgentHandle from_proposer(ObsKind kind, Proposer fn) {
        AgentHandle h;
        h.kind = kind;
        h.proposer = std::move(fn);
        h.fits_fn = [](const Circuit &) { return true; };
        return h;
    }

    bool fits(const Circuit &c) const { return fits_fn && fits_fn(c); }

    ParamVector propose(const Circuit &c, std::span<const double> theta,
                        double current_loss) const {
        if (!fits(c))
            throw std::invalid_argument(
                "agent proposal: encoding grid does not match the problem");
        return proposer(c, theta, current_loss);
    }
};

namespace detail {

class StopWatch {
  public:
    StopWatch() : start_(std::chrono::steady_clock::now()) {}
    double ms() const {
        return std::chrono::duration<double, std::milli>(
                   std::chrono::steady_clock::now() - start_)
            .count();
    }

  private:
    std::chrono::steady_clock::time_point start_;
};

inline void check_finite(double loss) {
    if (!std::isfinite(loss))
        throw std::runtime_error("optimizer: non-finite loss (divergence)");
}

} // namespace detail

/**
 * Plain Adam on the circuit parameters. Records the post-step loss each
 * iteration (one loss evaluation per iteration, plus gradient evaluations).
 */
template <class Problem>
Trajectory gradient_descent(Problem &problem, ParamVector theta, int iterations,
                            const OptimizerConfig &cfg = {},
                            AdamState *adam_state = nullptr) {
    if (iterations < 1) throw std::invalid_argument("gradient_descent: iterations < 1");
    AdamState local(theta.size(), cfg.lr);
    AdamState &adam = adam_state ? *adam_state : local;
    Trajectory out;
    out.steps.reserve(static_cast<std::size_t>(iterations));
    for (int iter = 0; iter < iterations; ++iter) {
        detail::StopWatch watch;
        problem.begin_iteration(iter);
        const auto grad = problem.gradient(theta, cfg.grad_method);
        adam_update(adam, theta, grad);
        const double loss = problem.loss(theta);
        detail::check_finite(loss);
        out.steps.push_back({iter, theta, loss, Branch::Gradient, watch.ms()});
        ++out.branch_counts[static_cast<std::size_t>(Branch::Gradient)];
    }
    return out;
}

namespace detail {

struct Candidate {
    Branch branch;
    ParamVector theta;
    double loss = 0.0;
};

/// Greedy argmin with the tie-break order gradient > rolling > MLP > CNN
/// (candidates are supplied in tie-break order; strict improvement switches).
inline const Candidate &argmin(const std::vector<Candidate> &candidates) {
    const Candidate *best = &candidates.front();
    for (const auto &c : candidates)
        if (c.loss < best->loss) best = &c;
    return *best;
}

} // namespace detail

/**
 * The augmented optimizer. Per iteration: one Adam step candidate from the
 * current iterate and one proposal from each agent, all evaluated once; the
 * parameters jump to the candidate of least loss. The previous iteration's
 * chosen loss doubles as the agents' current-error input, so each iteration
 * costs exactly the candidate evaluations (3; 4 with rolling) plus the
 * gradient work.
 *
 * With `rolling` set, a second Adam chain steps from the previous iterate
 * theta_{t-1} and joins the greedy selection (first iteration has no history
 * and runs the plain 3-candidate step).
 */
template <class Problem>
Trajectory augmented_optimize(Problem &problem, ParamVector theta, int iterations,
                              std::span<const AgentHandle> agents,
                              const OptimizerConfig &cfg = {}, bool rolling = false) {
    if (iterations < 1) throw std::invalid_argument("augmented_optimize: iterations < 1");
    for (const auto &a : agents)
        if (!a.fits(problem.circuit()))
            throw std::invalid_argument(
                "augmented_optimize: agent encoding grid does not match the problem");

    AdamState adam(theta.size(), cfg.lr);
    AdamState rolling_adam(theta.size(), cfg.lr);
    std::optional<ParamVector> theta_prev;

    Trajectory out;
    out.steps.reserve(static_cast<std::size_t>(iterations));

    problem.begin_iteration(0);
    double current_loss = problem.loss(theta);
    detail::check_finite(current_loss);

    for (int iter = 0; iter < iterations; ++iter) {
        detail::StopWatch watch;
        problem.begin_iteration(iter);

        std::vector<detail::Candidate> candidates;
        candidates.reserve(4);

        // Gradient candidate: one Adam step from theta. The Adam moments
        // follow the gradient stream every iteration, whichever branch wins.
        {
            const auto grad = problem.gradient(theta, cfg.grad_method);
            ParamVector theta_g = theta;
            adam_update(adam, theta_g, grad);
            candidates.push_back({Branch::Gradient, std::move(theta_g), 0.0});
        }
        if (rolling && theta_prev) {
            const auto grad = problem.gradient(*theta_prev, cfg.grad_method);
            ParamVector theta_r = *theta_prev;
            adam_update(rolling_adam, theta_r, grad);
            candidates.push_back({Branch::RollingGradient, std::move(theta_r), 0.0});
        }
        for (const auto &agent : agents) {
            const Branch branch =
                agent.kind == ObsKind::Feature ? Branch::MLP : Branch::CNN;
            candidates.push_back(
                {branch, agent.propose(problem.circuit(), theta, current_loss), 0.0});
        }

        Rng noise_snapshot;
        if (cfg.paired_candidates) noise_snapshot = problem.noise_rng();
        for (auto &c : candidates) {
            if (cfg.paired_candidates) problem.noise_rng() = noise_snapshot;
            c.loss = problem.loss(c.theta);
            detail::check_finite(c.loss);
        }

        const detail::Candidate &best = detail::argmin(candidates);
        if (rolling) theta_prev = theta; // one-step history
        theta = best.theta;
        current_loss = best.loss;
        out.steps.push_back({iter, theta, best.loss, best.branch, watch.ms()});
        ++out.branch_counts[static_cast<std::size_t>(best.branch)];
    }
    return out;
}

/// Every iteration takes the agent's proposal unconditionally (Appendix-style
/// solo evaluation).
template <class Problem>
Trajectory solo_agent_optimize(Problem &problem, ParamVector theta, int iterations,
                               const AgentHandle &agent) {
    if (iterations < 1) throw std::invalid_argument("solo_agent_optimize: iterations < 1");
    if (!agent.fits(problem.circuit()))
        throw std::invalid_argument(
            "solo_agent_optimize: agent encoding grid does not match the problem");
    Trajectory out;
    out.steps.reserve(static_cast<std::size_t>(iterations));
    problem.begin_iteration(0);
    double current_loss = problem.loss(theta);
    detail::check_finite(current_loss);
    const Branch branch = agent.kind == ObsKind::Feature ? Branch::MLP : Branch::CNN;
    for (int iter = 0; iter < iterations; ++iter) {
        detail::StopWatch watch;
        problem.begin_iteration(iter);
        theta = agent.propose(problem.circuit(), theta, current_loss);
        current_loss = problem.loss(theta);
        detail::check_finite(current_loss);
        out.steps.push_back({iter, theta, current_loss, branch, watch.ms()});
        ++out.branch_counts[static_cast<std::size_t>(branch)];
    }
    return out;
}

} // namespace qvcopt
