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
 * The circuit-optimization RL environment: random episodes over circularly
 * entangled circuits, the feature and block observation encodings, action
 * application, and the negative-MSE reward.
 */

#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "qvcopt/circuit.hpp"
#include "qvcopt/gradients.hpp"
#include "qvcopt/nn.hpp"
#include "qvcopt/rng.hpp"
#include "qvcopt/statevector.hpp"

namespace qvcopt {

enum class LossKind { MSE, BCE, CCE, ExpectationValue };

struct EnvConfig {
    int max_qubits = 6;
    int max_depth = 6;
    int horizon = 50;
    NoiseConfig noise;

    int max_params() const { return max_qubits * max_depth; }

    /// Desk-scale preset: trainable without GPUs.
    static EnvConfig desk() { return EnvConfig{6, 6, 50, {}}; }
    /// The full-scale configuration (20 qubits, depth 20, 150 timesteps).
    static EnvConfig paper() { return EnvConfig{20, 20, 150, {}}; }

    void validate() const {
        if (max_qubits < 1 || max_depth < 1 || horizon < 1)
            throw std::invalid_argument("env config: non-positive dimension");
        noise.validate();
    }
};

/// One optimization episode: the circuit, the cost readout, and the target.
struct EpisodeTask {
    Circuit circuit;
    ReadoutKind cost_kind = ReadoutKind::FirstZ;
    Observable cost;
    double target = 0.0;
    LossKind loss_kind = LossKind::MSE;
};

struct Observations {
    Tensor feature; // [max_params, 8]
    Tensor block;   // [5, max_qubits, max_depth] (sheet-major storage)
};

namespace detail {

inline double gate_type_code(GateKind k) {
    switch (k) {
    case GateKind::RX: return 0.0;
    case GateKind::RY: return 0.5;
    case GateKind::RZ: return 1.0;
    default: return 0.0;
    }
}

inline double input_type_code(InputType t) {
    return t == InputType::Ground ? 0.0 : 1.0;
}

inline void check_encodable(const Circuit &circuit, const EnvConfig &cfg) {
    if (circuit.n_qubits > cfg.max_qubits)
        throw std::invalid_argument("encoding: circuit has more qubits than the grid");
    if (circuit.n_params > cfg.max_params())
        throw std::invalid_argument("encoding: circuit has more parameters than the grid");
}

} // namespace detail

/**
 * Feature encoding: an [max_params, 8] matrix with one row per parameter slot:
 * [current error, parameter value, gate type, qubit/max_qubits,
 *  layer/max_depth, n_qubits/max_qubits, depth/max_depth, input type].
 * Rows past the circuit's parameter count are zero padding. For a shared
 * parameter the row describes its first gate.
 */
inline Tensor feature_encode(const Circuit &circuit, std::span<const double> params,
                             double current_error, const EnvConfig &cfg) {
    detail::check_encodable(circuit, cfg);
    const auto mp = static_cast<std::size_t>(cfg.max_params());
    Tensor out({mp, 8});
    std::vector<const GateInstance *> first_gate(
        static_cast<std::size_t>(circuit.n_params), nullptr);
    for (const auto &g : circuit.gates)
        if (g.param_index && !first_gate[static_cast<std::size_t>(*g.param_index)])
            first_gate[static_cast<std::size_t>(*g.param_index)] = &g;
    for (std::size_t p = 0; p < static_cast<std::size_t>(circuit.n_params); ++p) {
        const GateInstance &g = *first_gate[p];
        double *row = out.data.data() + p * 8;
        row[0] = current_error;
        row[1] = params[p];
        row[2] = detail::gate_type_code(g.kind);
        row[3] = static_cast<double>(g.qubits[0]) / cfg.max_qubits;
        row[4] = static_cast<double>(g.layer) / cfg.max_depth;
        row[5] = static_cast<double>(circuit.n_qubits) / cfg.max_qubits;
        row[6] = static_cast<double>(circuit.depth) / cfg.max_depth;
        row[7] = detail::input_type_code(circuit.input_type);
    }
    return out;
}

/**
 * Block encoding: logically [max_qubits, max_depth, 5]; sheets 0/1/2 hold the
 * angles of RX/RY/RZ gates at their (qubit, layer) positions, sheet 3 is the
 * input-type plane, sheet 4 the current-error plane. Stored sheet-major
 * ([5, max_qubits, max_depth]) so each sheet is one CNN input channel. Gates
 * deeper than the grid land in the last layer slot.
 */
inline Tensor block_encode(const Circuit &circuit, std::span<const double> params,
                           double current_error, const EnvConfig &cfg) {
    detail::check_encodable(circuit, cfg);
    const auto mq = static_cast<std::size_t>(cfg.max_qubits);
    const auto md = static_cast<std::size_t>(cfg.max_depth);
    Tensor out({5, mq, md});
    auto at = [&](std::size_t sheet, std::size_t qubit, std::size_t layer) -> double & {
        return out.data[sheet * mq * md + qubit * md + layer];
    };
    for (const auto &g : circuit.gates) {
        if (!g.param_index) continue;
        const std::size_t sheet = g.kind == GateKind::RX ? 0 : g.kind == GateKind::RY ? 1 : 2;
        const auto qubit = static_cast<std::size_t>(g.qubits[0]);
        const auto layer = std::min(static_cast<std::size_t>(g.layer), md - 1);
        at(sheet, qubit, layer) = params[static_cast<std::size_t>(*g.param_index)];
    }
    const double input_code = detail::input_type_code(circuit.input_type);
    for (std::size_t q = 0; q < mq; ++q)
        for (std::size_t l = 0; l < md; ++l) {
            at(3, q, l) = input_code;
            at(4, q, l) = current_error;
        }
    return out;
}

/// Reads one block-encoding entry by its logical (qubit, layer, sheet) index.
inline double block_at(const Tensor &block, int qubit, int layer, int sheet) {
    const std::size_t mq = block.shape[1], md = block.shape[2];
    return block.data[static_cast<std::size_t>(sheet) * mq * md +
                      static_cast<std::size_t>(qubit) * md +
                      static_cast<std::size_t>(layer)];
}

/**
 * Deployment-side encoding builder: both encodings for an externally supplied
 * circuit and parameter vector, with the caller's loss value in the error
 * slot. Used by the augmented optimizer to feed agents arbitrary losses
 * (cross-entropy and friends) without computing a reward.
 */
inline Observations external_error_feed(const Circuit &circuit,
                                        std::span<const double> params,
                                        double loss_value, const EnvConfig &cfg) {
    return {feature_encode(circuit, params, loss_value, cfg),
            block_encode(circuit, params, loss_value, cfg)};
}

/**
 * The training environment. Each episode draws a random circularly entangled
 * circuit, an input type, a readout cost and a target value; the agent writes
 * all circuit parameters each step and is rewarded with the negative MSE
 * between the circuit output and the target. A fixed-task environment (for
 * deployment-style evaluation) re-draws only the initial parameters.
 */
class QvcEnv {
  public:
    QvcEnv(EnvConfig cfg, std::uint64_t seed) : cfg_(cfg), master_(Rng::from_seed(seed)) {
        cfg_.validate();
        task_rng_ = master_.stream("env-tasks");
        noise_rng_ = master_.stream("env-noise");
    }

    QvcEnv(EnvConfig cfg, EpisodeTask fixed_task, std::uint64_t seed)
        : QvcEnv(cfg, seed) {
        fixed_task.circuit.validate();
        detail::check_encodable(fixed_task.circuit, cfg_);
        fixed_ = std::move(fixed_task);
    }

    const EnvConfig &config() const { return cfg_; }
    int max_params() const { return cfg_.max_params(); }
    const EpisodeTask &task() const { return task_; }
    const ParamVector &params() const { return params_; }
    double current_error() const { return error_; }

    Observations reset() {
        if (fixed_) {
            task_ = *fixed_;
        } else {
            task_.circuit = random_task_circuit(cfg_.max_qubits, cfg_.max_depth, task_rng_);
            task_.cost_kind = static_cast<ReadoutKind>(task_rng_.uniform_int(3));
            task_.cost = readout_cost(task_.cost_kind, task_.circuit.n_qubits);
            const auto [lo, hi] = readout_range(task_.cost_kind, task_.circuit.n_qubits);
            task_.target = task_rng_.uniform(lo, hi);
            task_.loss_kind = LossKind::MSE;
        }
        params_.assign(static_cast<std::size_t>(task_.circuit.n_params), 0.0);
        for (double &p : params_)
            p = task_rng_.uniform(-std::numbers::pi, std::numbers::pi);

        NoiseConfig noise = cfg_.noise;
        noise.rng_seed = noise_rng_.next_u64();
        evaluator_.emplace(task_.circuit, task_.cost, noise);

        step_count_ = 0;
        error_ = loss_of(evaluator_->evaluate(params_));
        return observations();
    }

    struct StepOut {
        Observations obs;
        double reward = 0.0;
        bool done = false;
    };

    /// Writes the first n_params action components into the circuit (the
    /// remainder of the action vector is truncated away).
    StepOut step(std::span<const double> action) {
        if (action.size() != static_cast<std::size_t>(cfg_.max_params()))
            throw std::invalid_argument("env step: action length != max_params");
        if (!evaluator_) throw std::logic_error("env step: reset() not called");
        std::copy(action.begin(), action.begin() + static_cast<std::ptrdiff_t>(params_.size()),
                  params_.begin());
        const double output = evaluator_->evaluate(params_);
        const double reward = -loss_of(output);
        error_ = -reward;
        ++step_count_;
        return {observations(), reward, step_count_ >= cfg_.horizon};
    }

    StepOut step(const std::vector<double> &action) {
        return step(std::span<const double>(action));
    }

  private:
    double loss_of(double output) const {
        const double diff = output - task_.target;
        return diff * diff;
    }

    Observations observations() const {
        return external_error_feed(task_.circuit, params_, error_, cfg_);
    }

    EnvConfig cfg_;
    Rng master_, task_rng_, noise_rng_;
    std::optional<EpisodeTask> fixed_;
    EpisodeTask task_;
    ParamVector params_;
    std::optional<Evaluator> evaluator_;
    int step_count_ = 0;
    double error_ = 0.0;
};

enum class ObsKind { Feature, Block };

/// Single-encoding view of a QvcEnv, matching the training loop's interface.
class EnvView {
  public:
    EnvView(QvcEnv env, ObsKind kind) : env_(std::move(env)), kind_(kind) {}

    struct StepOut {
        Tensor obs;
        double reward = 0.0;
        bool done = false;
    };

    Tensor reset() { return pick(env_.reset()); }

    StepOut step(std::span<const double> action) {
        auto out = env_.step(action);
        return {pick(std::move(out.obs)), out.reward, out.done};
    }
    StepOut step(const std::vector<double> &action) {
        return step(std::span<const double>(action));
    }

    std::vector<std::size_t> obs_shape() const {
        const auto mp = static_cast<std::size_t>(env_.max_params());
        const auto mq = static_cast<std::size_t>(env_.config().max_qubits);
        const auto md = static_cast<std::size_t>(env_.config().max_depth);
        return kind_ == ObsKind::Feature ? std::vector<std::size_t>{mp, 8}
                                         : std::vector<std::size_t>{5, mq, md};
    }

    std::size_t action_dim() const {
        return static_cast<std::size_t>(env_.max_params());
    }

    QvcEnv &env() { return env_; }
    ObsKind kind() const { return kind_; }

  private:
    Tensor pick(Observations obs) const {
        return kind_ == ObsKind::Feature ? std::move(obs.feature)
                                         : std::move(obs.block);
    }

    QvcEnv env_;
    ObsKind kind_;
};

} // namespace qvcopt
