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
 * Dense statevector simulation: gate kernels, expectation values of Pauli
 * sums, shot-noise sampling, and the depolarizing channel acting on
 * expectations.
 *
 * Qubit ordering convention: qubit 0 is the most significant bit of the
 * basis-state index, so |q0 q1 ... q_{n-1}> has index q0*2^{n-1} + ... .
 */

#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "qvcopt/circuit.hpp"
#include "qvcopt/rng.hpp"

namespace qvcopt {

/**
 * Noise model for circuit evaluation: optional shot sampling (absent means
 * exact expectations) and a global depolarizing channel of strength
 * depolarizing_p applied once per circuit evaluation.
 */
struct NoiseConfig {
    std::optional<std::uint64_t> shots;
    double depolarizing_p = 0.0;
    std::uint64_t rng_seed = 0;
    bool paired_sampling = false; // common random numbers for +/- shift pairs

    void validate() const {
        if (shots && *shots == 0)
            throw std::invalid_argument("noise: shots must be >= 1 when present");
        if (depolarizing_p < 0.0 || depolarizing_p >= 1.0)
            throw std::invalid_argument("noise: depolarizing_p outside [0, 1)");
    }

    bool noiseless() const { return !shots && depolarizing_p == 0.0; }
};

class StateVector {
  public:
    explicit StateVector(int n_qubits)
        : n_qubits_(n_qubits),
          amplitudes_(std::size_t{1} << check_qubits(n_qubits)) {
        amplitudes_[0] = 1.0;
    }

    static StateVector ground(int n_qubits) { return StateVector(n_qubits); }

    static StateVector equal_superposition(int n_qubits) {
        StateVector s(n_qubits);
        for (int q = 0; q < n_qubits; ++q) s.apply_h(q);
        return s;
    }

    int n_qubits() const { return n_qubits_; }
    std::size_t dim() const { return amplitudes_.size(); }
    std::span<const std::complex<double>> amplitudes() const { return amplitudes_; }
    std::complex<double> &operator[](std::size_t i) { return amplitudes_[i]; }
    const std::complex<double> &operator[](std::size_t i) const {
        return amplitudes_[i];
    }

    double norm_sq() const {
        double s = 0.0;
        for (const auto &a : amplitudes_) s += std::norm(a);
        return s;
    }

    /// Mask with the bit of qubit q set (qubit 0 = most significant).
    std::size_t qubit_mask(int q) const {
        return std::size_t{1} << (n_qubits_ - 1 - q);
    }

    void apply_h(int qubit) {
        static constexpr double kInvSqrt2 = 0.7071067811865475244;
        apply_1q(qubit, [](std::complex<double> &a0, std::complex<double> &a1) {
            const std::complex<double> t0 = a0;
            a0 = kInvSqrt2 * (t0 + a1);
            a1 = kInvSqrt2 * (t0 - a1);
        });
    }

    void apply_rx(int qubit, double theta) {
        const double c = std::cos(0.5 * theta);
        const double s = std::sin(0.5 * theta);
        apply_1q(qubit, [c, s](std::complex<double> &a0, std::complex<double> &a1) {
            const std::complex<double> t0 = a0;
            a0 = c * t0 + std::complex<double>(0.0, -s) * a1;
            a1 = std::complex<double>(0.0, -s) * t0 + c * a1;
        });
    }

    void apply_ry(int qubit, double theta) {
        const double c = std::cos(0.5 * theta);
        const double s = std::sin(0.5 * theta);
        apply_1q(qubit, [c, s](std::complex<double> &a0, std::complex<double> &a1) {
            const std::complex<double> t0 = a0;
            a0 = c * t0 - s * a1;
            a1 = s * t0 + c * a1;
        });
    }

    void apply_rz(int qubit, double theta) {
        const std::complex<double> em(std::cos(0.5 * theta), -std::sin(0.5 * theta));
        const std::complex<double> ep = std::conj(em);
        apply_1q(qubit, [em, ep](std::complex<double> &a0, std::complex<double> &a1) {
            a0 *= em;
            a1 *= ep;
        });
    }

    void apply_cnot(int control, int target) {
        if (control == target)
            throw std::invalid_argument("apply_cnot: control == target");
        const std::size_t cm = qubit_mask(control);
        const std::size_t tm = qubit_mask(target);
        for (std::size_t i = 0; i < amplitudes_.size(); ++i)
            if ((i & cm) && !(i & tm)) std::swap(amplitudes_[i], amplitudes_[i | tm]);
    }

    /// Applies a bare Pauli operator (used by observables and the adjoint pass).
    void apply_pauli(int qubit, PauliAxis axis) {
        const std::size_t m = qubit_mask(qubit);
        switch (axis) {
        case PauliAxis::X:
            for (std::size_t i = 0; i < amplitudes_.size(); ++i)
                if (!(i & m)) std::swap(amplitudes_[i], amplitudes_[i | m]);
            break;
        case PauliAxis::Y:
            // Y|0> = i|1>, Y|1> = -i|0>
            for (std::size_t i = 0; i < amplitudes_.size(); ++i)
                if (!(i & m)) {
                    const std::complex<double> a0 = amplitudes_[i];
                    const std::complex<double> a1 = amplitudes_[i | m];
                    amplitudes_[i] = std::complex<double>(0.0, -1.0) * a1;
                    amplitudes_[i | m] = std::complex<double>(0.0, 1.0) * a0;
                }
            break;
        case PauliAxis::Z:
            for (std::size_t i = 0; i < amplitudes_.size(); ++i)
                if (i & m) amplitudes_[i] = -amplitudes_[i];
            break;
        }
    }

  private:
    static int check_qubits(int n) {
        if (n < 1 || n > 30)
            throw std::invalid_argument("statevector: n_qubits outside [1, 30]");
        return n;
    }

    void check_qubit_index(int q) const {
        if (q < 0 || q >= n_qubits_)
            throw std::out_of_range("statevector: qubit index out of range");
    }

    template <class Kernel> void apply_1q(int qubit, Kernel &&k) {
        check_qubit_index(qubit);
        const std::size_t m = qubit_mask(qubit);
        for (std::size_t i = 0; i < amplitudes_.size(); ++i)
            if (!(i & m)) k(amplitudes_[i], amplitudes_[i | m]);
    }

    int n_qubits_;
    std::vector<std::complex<double>> amplitudes_;
};

/// Applies one gate, resolving rotation angles from `params`.
inline void apply_gate(StateVector &state, const GateInstance &gate,
                       std::span<const double> params = {}) {
    switch (gate.kind) {
    case GateKind::H: state.apply_h(gate.qubits[0]); break;
    case GateKind::CNOT: state.apply_cnot(gate.qubits[0], gate.qubits[1]); break;
    case GateKind::RX:
    case GateKind::RY:
    case GateKind::RZ: {
        const double theta = gate.fixed_angle
                                 ? *gate.fixed_angle
                                 : params[static_cast<std::size_t>(*gate.param_index)];
        if (gate.kind == GateKind::RX) state.apply_rx(gate.qubits[0], theta);
        else if (gate.kind == GateKind::RY) state.apply_ry(gate.qubits[0], theta);
        else state.apply_rz(gate.qubits[0], theta);
        break;
    }
    }
}

/// Input-state preparation followed by every gate of the circuit.
inline StateVector run_circuit(const Circuit &circuit, std::span<const double> params) {
    StateVector state = circuit.input_type == InputType::Ground
                            ? StateVector::ground(circuit.n_qubits)
                            : StateVector::equal_superposition(circuit.n_qubits);
    for (const auto &gate : circuit.gates) apply_gate(state, gate, params);
    return state;
}

namespace detail {

/// <state| Z_mask |state> for a Z-diagonal string given its qubit bit mask.
inline double z_string_expectation(const StateVector &state, std::size_t mask) {
    double value = 0.0;
    const auto amps = state.amplitudes();
    for (std::size_t i = 0; i < amps.size(); ++i) {
        const double p = std::norm(amps[i]);
        value += (std::popcount(i & mask) & 1) ? -p : p;
    }
    return value;
}

inline std::size_t term_z_mask(const StateVector &state, const PauliTerm &term) {
    std::size_t mask = 0;
    for (const auto &p : term.paulis) mask |= state.qubit_mask(p.qubit);
    return mask;
}

/// Rotates X/Y factors of `term` onto the Z axis (H for X, RX(pi/2) for Y).
inline StateVector rotate_to_z_basis(const StateVector &state, const PauliTerm &term) {
    StateVector rotated = state;
    for (const auto &p : term.paulis) {
        if (p.axis == PauliAxis::X) rotated.apply_h(p.qubit);
        else if (p.axis == PauliAxis::Y)
            rotated.apply_rx(p.qubit, std::numbers::pi / 2.0);
    }
    return rotated;
}

} // namespace detail

/**
 * Exact expectation of a Pauli-sum observable (without constant offset).
 * Non-diagonal terms are measured after rotating them to the Z basis.
 */
inline double expectation_terms(const StateVector &state, const Observable &obs) {
    obs.validate(state.n_qubits());
    double value = 0.0;
    for (const auto &term : obs.terms) {
        if (term.z_diagonal()) {
            value += term.weight *
                     detail::z_string_expectation(state, detail::term_z_mask(state, term));
        } else {
            const StateVector rotated = detail::rotate_to_z_basis(state, term);
            value += term.weight * detail::z_string_expectation(
                                       rotated, detail::term_z_mask(rotated, term));
        }
    }
    return value;
}

/// Exact expectation including the observable's constant offset.
inline double expectation(const StateVector &state, const Observable &obs) {
    return expectation_terms(state, obs) + obs.constant_offset;
}

namespace detail {

/// Draws `shots` basis states from |amplitudes|^2 into per-state counts.
inline std::vector<std::uint64_t> sample_counts(const StateVector &state,
                                                std::uint64_t shots, Rng &rng) {
    std::vector<double> cdf(state.dim());
    double acc = 0.0;
    const auto amps = state.amplitudes();
    for (std::size_t i = 0; i < amps.size(); ++i) {
        acc += std::norm(amps[i]);
        cdf[i] = acc;
    }
    std::vector<std::uint64_t> counts(state.dim(), 0);
    for (std::uint64_t s = 0; s < shots; ++s) {
        const double u = rng.uniform() * acc;
        const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
        const std::size_t idx =
            it == cdf.end() ? cdf.size() - 1
                            : static_cast<std::size_t>(it - cdf.begin());
        ++counts[idx];
    }
    return counts;
}

inline double z_string_from_counts(const std::vector<std::uint64_t> &counts,
                                   std::size_t mask, std::uint64_t shots) {
    std::int64_t sum = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        const auto c = static_cast<std::int64_t>(counts[i]);
        sum += (std::popcount(i & mask) & 1) ? -c : c;
    }
    return static_cast<double>(sum) / static_cast<double>(shots);
}

} // namespace detail

/**
 * Monte-Carlo estimate of the observable's expectation (without offset):
 * Z-diagonal terms share one batch of `shots` computational-basis samples;
 * each non-diagonal term is sampled separately in its rotated basis.
 */
inline double sample_expectation_terms(const StateVector &state, const Observable &obs,
                                       std::uint64_t shots, Rng &rng) {
    obs.validate(state.n_qubits());
    if (shots == 0) throw std::invalid_argument("sample_expectation: shots == 0");
    double value = 0.0;
    bool have_diagonal_counts = false;
    std::vector<std::uint64_t> diagonal_counts;
    for (const auto &term : obs.terms) {
        if (term.z_diagonal()) {
            if (!have_diagonal_counts) {
                diagonal_counts = detail::sample_counts(state, shots, rng);
                have_diagonal_counts = true;
            }
            value += term.weight *
                     detail::z_string_from_counts(
                         diagonal_counts, detail::term_z_mask(state, term), shots);
        } else {
            const StateVector rotated = detail::rotate_to_z_basis(state, term);
            const auto counts = detail::sample_counts(rotated, shots, rng);
            value += term.weight *
                     detail::z_string_from_counts(
                         counts, detail::term_z_mask(rotated, term), shots);
        }
    }
    return value;
}

inline double sample_expectation(const StateVector &state, const Observable &obs,
                                 std::uint64_t shots, Rng &rng) {
    return sample_expectation_terms(state, obs, shots, rng) + obs.constant_offset;
}

/**
 * Exact action of the global depolarizing channel on the expectation of a
 * traceless Pauli-sum observable: rho -> (1-p) rho + p/(4^n - 1) sum_i P_i
 * rho P_i scales every such expectation by 1 - p * 4^n / (4^n - 1), because
 * the sum over all 4^n Pauli conjugations of rho equals 2^n tr(rho) I.
 */
inline double depolarize_factor(int n_qubits, double p) {
    if (p < 0.0 || p >= 1.0)
        throw std::invalid_argument("depolarize: p outside [0, 1)");
    if (p == 0.0) return 1.0;
    const double pauli_count = std::pow(4.0, n_qubits);
    return 1.0 - p * pauli_count / (pauli_count - 1.0);
}

inline double depolarize_expectation(double value, int n_qubits, double p) {
    return value * depolarize_factor(n_qubits, p);
}

} // namespace qvcopt
