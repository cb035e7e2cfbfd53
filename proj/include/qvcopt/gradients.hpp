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
 * Gradients of circuit expectations: the parameter-shift rule, adjoint
 * differentiation for exact simulation, and a central finite-difference
 * oracle.
 */

#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "qvcopt/circuit.hpp"
#include "qvcopt/rng.hpp"
#include "qvcopt/statevector.hpp"

namespace qvcopt {

enum class GradMethod { Auto, ParameterShift, Adjoint, FiniteDifference };

/**
 * Binds a circuit, observable and noise model into an evaluation context:
 * f(theta) = <0| U(theta)^dag O U(theta) |0>, with optional shot sampling and
 * depolarizing scaling applied in that order. Sampling draws fresh randomness
 * per evaluation from a stream derived from noise.rng_seed, so a context is
 * deterministic given its seed and call sequence.
 */
class Evaluator {
  public:
    Evaluator(Circuit circuit, Observable observable, NoiseConfig noise = {})
        : circuit_(std::move(circuit)), observable_(std::move(observable)),
          noise_(noise), rng_(Rng::from_seed(noise.rng_seed).stream("shot-sampling")) {
        noise_.validate();
        circuit_.validate();
        observable_.validate(circuit_.n_qubits);
        depol_factor_ = depolarize_factor(circuit_.n_qubits, noise_.depolarizing_p);
    }

    const Circuit &circuit() const { return circuit_; }
    const Observable &observable() const { return observable_; }
    const NoiseConfig &noise() const { return noise_; }
    int n_params() const { return circuit_.n_params; }

    /// Input state followed by all gates; an optional per-gate angle shift
    /// supports the parameter-shift rule under shared parameters.
    StateVector run(std::span<const double> params,
                    std::optional<std::size_t> shifted_gate = std::nullopt,
                    double gate_shift = 0.0) const {
        check_params(params);
        StateVector state = circuit_.input_type == InputType::Ground
                                ? StateVector::ground(circuit_.n_qubits)
                                : StateVector::equal_superposition(circuit_.n_qubits);
        for (std::size_t g = 0; g < circuit_.gates.size(); ++g) {
            const GateInstance &gate = circuit_.gates[g];
            if (shifted_gate && *shifted_gate == g) {
                const double theta = circuit_.angle_of(gate, params) + gate_shift;
                if (gate.kind == GateKind::RX) state.apply_rx(gate.qubits[0], theta);
                else if (gate.kind == GateKind::RY) state.apply_ry(gate.qubits[0], theta);
                else state.apply_rz(gate.qubits[0], theta);
            } else {
                apply_gate(state, gate, params);
            }
        }
        return state;
    }

    double evaluate(std::span<const double> params) {
        return measure(run(params), rng_);
    }

    /// Noiseless expectation regardless of the configured noise model.
    double evaluate_exact(std::span<const double> params) const {
        return expectation(run(params), observable_);
    }

    /**
     * Parameter-shift gradients: df/dtheta_i = (f(+s) - f(-s)) / (2 sin s)
     * per rotation gate, summed into the gate's parameter slot (a parameter
     * shared by several gates accumulates one shift pair per gate). Under
     * shot noise every shifted evaluation is sampled independently unless
     * noise.paired_sampling is set.
     */
    std::vector<double> parameter_shift_grad(std::span<const double> params,
                                             double s = std::numbers::pi / 2.0) {
        const double denom = 2.0 * std::sin(s);
        if (std::abs(denom) < 1e-12)
            throw std::invalid_argument("parameter_shift_grad: s is a multiple of pi");
        check_params(params);
        std::vector<double> grad(static_cast<std::size_t>(circuit_.n_params), 0.0);
        for (std::size_t g = 0; g < circuit_.gates.size(); ++g) {
            const GateInstance &gate = circuit_.gates[g];
            if (!gate.param_index) continue;
            double plus, minus;
            if (noise_.paired_sampling && noise_.shots) {
                Rng pair_plus(detail::mix64(rng_.next_u64()));
                Rng pair_minus = pair_plus;
                plus = measure(run(params, g, +s), pair_plus);
                minus = measure(run(params, g, -s), pair_minus);
            } else {
                plus = measure(run(params, g, +s), rng_);
                minus = measure(run(params, g, -s), rng_);
            }
            grad[static_cast<std::size_t>(*gate.param_index)] += (plus - minus) / denom;
        }
        return grad;
    }

    /**
     * Adjoint differentiation: one forward pass and one reverse sweep which
     * un-applies each gate from the ket while dragging O|psi> along as the
     * bra. Gradient of gate k with generator -(i/2) sigma is
     * Im(<bra_k| sigma |ket_k>). Exact simulation only.
     */
    std::vector<double> adjoint_grad(std::span<const double> params) const {
        if (noise_.shots)
            throw std::logic_error("adjoint_grad: adjoint requires exact simulation "
                                   "(shot noise enabled)");
        check_params(params);
        StateVector ket = run(params);
        StateVector bra = apply_observable(ket);
        std::vector<double> grad(static_cast<std::size_t>(circuit_.n_params), 0.0);
        for (std::size_t g = circuit_.gates.size(); g-- > 0;) {
            const GateInstance &gate = circuit_.gates[g];
            if (gate.param_index) {
                StateVector sigma_ket = ket;
                sigma_ket.apply_pauli(gate.qubits[0], rotation_axis(gate.kind));
                grad[static_cast<std::size_t>(*gate.param_index)] +=
                    imag_inner(bra, sigma_ket);
            }
            unapply(ket, gate, params);
            unapply(bra, gate, params);
        }
        // The depolarizing channel is linear, so it scales gradients by the
        // same factor it scales expectations.
        if (depol_factor_ != 1.0)
            for (double &v : grad) v *= depol_factor_;
        return grad;
    }

    /// Central finite differences (test oracle; noiseless only).
    std::vector<double> finite_difference_grad(std::span<const double> params,
                                               double eps = 1e-5) const {
        if (eps <= 0.0) throw std::invalid_argument("finite_difference_grad: eps <= 0");
        if (noise_.shots)
            throw std::logic_error("finite_difference_grad: requires exact simulation");
        check_params(params);
        std::vector<double> theta(params.begin(), params.end());
        std::vector<double> grad(theta.size());
        for (std::size_t i = 0; i < theta.size(); ++i) {
            const double saved = theta[i];
            theta[i] = saved + eps;
            const double plus = measure_exact(run(theta));
            theta[i] = saved - eps;
            const double minus = measure_exact(run(theta));
            theta[i] = saved;
            grad[i] = (plus - minus) / (2.0 * eps);
        }
        return grad;
    }

    /// Gradient with the context's preferred method: adjoint when exact,
    /// parameter shift when sampling.
    std::vector<double> gradient(std::span<const double> params,
                                 GradMethod method = GradMethod::Auto) {
        switch (method) {
        case GradMethod::ParameterShift: return parameter_shift_grad(params);
        case GradMethod::Adjoint: return adjoint_grad(params);
        case GradMethod::FiniteDifference: return finite_difference_grad(params);
        case GradMethod::Auto:
            return noise_.shots ? parameter_shift_grad(params) : adjoint_grad(params);
        }
        throw std::logic_error("gradient: unknown method");
    }

    /// Measurement pipeline shared with multi-observable callers: sampling
    /// (if configured), then depolarizing scaling, then the constant offset.
    double measure(const StateVector &state, Rng &rng) const {
        double value = noise_.shots
                           ? sample_expectation_terms(state, observable_, *noise_.shots, rng)
                           : expectation_terms(state, observable_);
        return value * depol_factor_ + observable_.constant_offset;
    }

    Rng &rng() { return rng_; }

  private:
    static PauliAxis rotation_axis(GateKind k) {
        return k == GateKind::RX ? PauliAxis::X
               : k == GateKind::RY ? PauliAxis::Y
                                   : PauliAxis::Z;
    }

    double measure_exact(const StateVector &state) const {
        return expectation_terms(state, observable_) * depol_factor_ +
               observable_.constant_offset;
    }

    void check_params(std::span<const double> params) const {
        if (params.size() != static_cast<std::size_t>(circuit_.n_params))
            throw std::invalid_argument("evaluate: parameter count mismatch");
    }

    StateVector apply_observable(const StateVector &state) const {
        StateVector out(state.n_qubits());
        out[0] = 0.0;
        for (const auto &term : observable_.terms) {
            StateVector t = state;
            for (const auto &p : term.paulis) t.apply_pauli(p.qubit, p.axis);
            for (std::size_t i = 0; i < out.dim(); ++i) out[i] += term.weight * t[i];
        }
        return out;
    }

    static double imag_inner(const StateVector &bra, const StateVector &ket) {
        std::complex<double> z = 0.0;
        for (std::size_t i = 0; i < bra.dim(); ++i) z += std::conj(bra[i]) * ket[i];
        return z.imag();
    }

    static void unapply(StateVector &state, const GateInstance &gate,
                        std::span<const double> params) {
        switch (gate.kind) {
        case GateKind::H: state.apply_h(gate.qubits[0]); break;
        case GateKind::CNOT: state.apply_cnot(gate.qubits[0], gate.qubits[1]); break;
        case GateKind::RX: state.apply_rx(gate.qubits[0], -angle(gate, params)); break;
        case GateKind::RY: state.apply_ry(gate.qubits[0], -angle(gate, params)); break;
        case GateKind::RZ: state.apply_rz(gate.qubits[0], -angle(gate, params)); break;
        }
    }

    static double angle(const GateInstance &gate, std::span<const double> params) {
        return gate.fixed_angle ? *gate.fixed_angle
                                : params[static_cast<std::size_t>(*gate.param_index)];
    }

    Circuit circuit_;
    Observable observable_;
    NoiseConfig noise_;
    Rng rng_;
    double depol_factor_ = 1.0;
};

} // namespace qvcopt
