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
 * Circuit intermediate representation: gates, parameterized circuits,
 * Pauli-sum observables, and the circuit/observable builders used by the
 * environment and the benchmark tasks.
 */

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qvcopt/rng.hpp"

namespace qvcopt {

enum class GateKind { CNOT, H, RX, RY, RZ };

constexpr bool is_rotation(GateKind k) {
    return k == GateKind::RX || k == GateKind::RY || k == GateKind::RZ;
}

constexpr const char *gate_name(GateKind k) {
    switch (k) {
    case GateKind::CNOT: return "CNOT";
    case GateKind::H: return "H";
    case GateKind::RX: return "RX";
    case GateKind::RY: return "RY";
    case GateKind::RZ: return "RZ";
    }
    return "?";
}

enum class InputType { Ground, EqualSuperposition };

/**
 * One gate in a circuit. Rotation gates carry either a param_index into the
 * circuit's parameter vector or a fixed_angle (data-encoding gates that are
 * not trainable); exactly one of the two is set. `layer` is the structural
 * depth position used by the observation encodings.
 */
struct GateInstance {
    GateKind kind;
    std::array<int, 2> qubits{-1, -1}; // qubits[1] = -1 for one-qubit gates
    std::optional<int> param_index;
    std::optional<double> fixed_angle;
    int layer = 0;

    int n_qubits() const { return qubits[1] < 0 ? 1 : 2; }
    int control() const { return qubits[0]; }
    int target() const { return qubits[1]; }
};

inline GateInstance make_gate(GateKind kind, int qubit, int layer) {
    return GateInstance{kind, {qubit, -1}, std::nullopt, std::nullopt, layer};
}

inline GateInstance make_rotation(GateKind kind, int qubit, int param_index,
                                  int layer) {
    return GateInstance{kind, {qubit, -1}, param_index, std::nullopt, layer};
}

inline GateInstance make_fixed_rotation(GateKind kind, int qubit, double angle,
                                        int layer) {
    return GateInstance{kind, {qubit, -1}, std::nullopt, angle, layer};
}

inline GateInstance make_cnot(int control, int target, int layer) {
    return GateInstance{GateKind::CNOT, {control, target}, std::nullopt,
                        std::nullopt, layer};
}

/// Parameter values, in radians. Angles are periodic; no range is enforced.
using ParamVector = std::vector<double>;

/// Copy of `params` with values[index] += shift.
inline ParamVector shifted(const ParamVector &params, std::size_t index,
                           double shift) {
    ParamVector out = params;
    out.at(index) += shift;
    return out;
}

/**
 * Ordered gate list over n_qubits. n_params counts distinct trainable
 * parameters; task circuits use each index exactly once, while QAOA circuits
 * share one index across all gates of a layer.
 */
struct Circuit {
    int n_qubits = 0;
    int depth = 0;
    std::vector<GateInstance> gates;
    int n_params = 0;
    InputType input_type = InputType::Ground;

    /// Angle of a rotation gate under `params`.
    double angle_of(const GateInstance &g, std::span<const double> params) const {
        if (g.fixed_angle) return *g.fixed_angle;
        return params[static_cast<std::size_t>(*g.param_index)];
    }

    void validate() const;
};

inline void Circuit::validate() const {
    if (n_qubits < 1) throw std::invalid_argument("circuit: n_qubits < 1");
    std::vector<int> uses(static_cast<std::size_t>(n_params), 0);
    for (const auto &g : gates) {
        for (int i = 0; i < g.n_qubits(); ++i) {
            if (g.qubits[static_cast<std::size_t>(i)] < 0 ||
                g.qubits[static_cast<std::size_t>(i)] >= n_qubits)
                throw std::out_of_range("circuit: qubit index out of range");
        }
        if (g.kind == GateKind::CNOT && g.qubits[0] == g.qubits[1])
            throw std::invalid_argument("circuit: CNOT control == target");
        if (is_rotation(g.kind)) {
            if (g.param_index.has_value() == g.fixed_angle.has_value())
                throw std::invalid_argument(
                    "circuit: rotation gate needs exactly one of param_index "
                    "or fixed_angle");
            if (g.param_index) {
                if (*g.param_index < 0 || *g.param_index >= n_params)
                    throw std::out_of_range("circuit: param_index out of range");
                ++uses[static_cast<std::size_t>(*g.param_index)];
            }
        } else if (g.param_index || g.fixed_angle) {
            throw std::invalid_argument("circuit: non-rotation gate carries a parameter");
        }
        if (g.layer < 0 || (depth > 0 && g.layer >= depth))
            throw std::out_of_range("circuit: gate layer out of range");
    }
    for (int u : uses)
        if (u == 0) throw std::invalid_argument("circuit: unused param_index");
}

// ---------------------------------------------------------------------------
// Observables
// ---------------------------------------------------------------------------

enum class PauliAxis : std::uint8_t { X, Y, Z };

constexpr char axis_letter(PauliAxis a) {
    return a == PauliAxis::X ? 'X' : a == PauliAxis::Y ? 'Y' : 'Z';
}

struct PauliOp {
    int qubit;
    PauliAxis axis;
    friend bool operator==(const PauliOp &, const PauliOp &) = default;
};

/// Weighted Pauli string; empty `paulis` is disallowed (terms are traceless).
struct PauliTerm {
    double weight = 1.0;
    std::vector<PauliOp> paulis; // sorted by qubit, one op per qubit

    bool z_diagonal() const {
        return std::all_of(paulis.begin(), paulis.end(),
                           [](const PauliOp &p) { return p.axis == PauliAxis::Z; });
    }
};

/**
 * Weighted sum of Pauli strings plus a classical constant offset. The offset
 * (QAOA's -|E|/2) is added after any noise model acts on the quantum part.
 */
struct Observable {
    std::vector<PauliTerm> terms;
    double constant_offset = 0.0;

    bool z_diagonal() const {
        return std::all_of(terms.begin(), terms.end(),
                           [](const PauliTerm &t) { return t.z_diagonal(); });
    }

    int max_qubit() const {
        int m = -1;
        for (const auto &t : terms)
            for (const auto &p : t.paulis) m = std::max(m, p.qubit);
        return m;
    }

    void validate(int n_qubits) const {
        for (const auto &t : terms) {
            if (t.paulis.empty())
                throw std::invalid_argument("observable: empty Pauli term");
            for (const auto &p : t.paulis)
                if (p.qubit < 0 || p.qubit >= n_qubits)
                    throw std::out_of_range("observable: qubit out of range");
        }
    }
};

/// Single Z string on the given qubits, weight 1.
inline Observable z_string(std::initializer_list<int> qubits, double weight = 1.0) {
    PauliTerm term;
    term.weight = weight;
    for (int q : qubits) term.paulis.push_back({q, PauliAxis::Z});
    std::sort(term.paulis.begin(), term.paulis.end(),
              [](const PauliOp &a, const PauliOp &b) { return a.qubit < b.qubit; });
    return Observable{{term}, 0.0};
}

enum class ReadoutKind { ProductZ, FirstZ, SumZ };

/// The three readout cost functions offered to the training environment.
inline Observable readout_cost(ReadoutKind kind, int n_qubits) {
    if (n_qubits < 1) throw std::invalid_argument("readout_cost: n_qubits < 1");
    Observable obs;
    switch (kind) {
    case ReadoutKind::ProductZ: {
        PauliTerm t;
        for (int q = 0; q < n_qubits; ++q) t.paulis.push_back({q, PauliAxis::Z});
        obs.terms.push_back(std::move(t));
        break;
    }
    case ReadoutKind::FirstZ:
        obs.terms.push_back({1.0, {{0, PauliAxis::Z}}});
        break;
    case ReadoutKind::SumZ:
        for (int q = 0; q < n_qubits; ++q)
            obs.terms.push_back({1.0, {{q, PauliAxis::Z}}});
        break;
    }
    return obs;
}

/// Attainable range of a readout cost's expectation value.
inline std::pair<double, double> readout_range(ReadoutKind kind, int n_qubits) {
    if (kind == ReadoutKind::SumZ)
        return {-static_cast<double>(n_qubits), static_cast<double>(n_qubits)};
    return {-1.0, 1.0};
}

// ---------------------------------------------------------------------------
// Builders
// ---------------------------------------------------------------------------

namespace detail {
/// Circular CNOT chain: qubit i controls (i+1) mod n.
inline void append_ring(std::vector<GateInstance> &gates, int n_qubits, int layer) {
    for (int q = 0; q < n_qubits; ++q)
        gates.push_back(make_cnot(q, (q + 1) % n_qubits, layer));
}
} // namespace detail

/**
 * Random training-episode circuit: uniform qubit count in {2..max_qubits},
 * uniform depth in {1..max_depth}; each layer is one random Pauli rotation
 * per qubit followed by a circular CNOT chain. The input state is drawn
 * uniformly from {ground, equal superposition}.
 */
inline Circuit random_task_circuit(int max_qubits, int max_depth, Rng &rng) {
    if (max_qubits < 2) throw std::invalid_argument("random_task_circuit: max_qubits < 2");
    if (max_depth < 1) throw std::invalid_argument("random_task_circuit: max_depth < 1");
    Circuit c;
    c.n_qubits = 2 + static_cast<int>(rng.uniform_int(
                         static_cast<std::uint64_t>(max_qubits - 1)));
    c.depth = 1 + static_cast<int>(rng.uniform_int(
                      static_cast<std::uint64_t>(max_depth)));
    c.input_type = rng.uniform_int(2) == 0 ? InputType::Ground
                                           : InputType::EqualSuperposition;
    static constexpr std::array<GateKind, 3> kRotations{GateKind::RX, GateKind::RY,
                                                        GateKind::RZ};
    int param = 0;
    for (int layer = 0; layer < c.depth; ++layer) {
        for (int q = 0; q < c.n_qubits; ++q) {
            GateKind kind = kRotations[rng.uniform_int(3)];
            c.gates.push_back(make_rotation(kind, q, param++, layer));
        }
        detail::append_ring(c.gates, c.n_qubits, layer);
    }
    c.n_params = param;
    return c;
}

/**
 * Hardware-efficient ansatz: per layer, RY then RZ on every qubit followed by
 * a circular CNOT chain. 2 * n_qubits * layers parameters.
 */
inline Circuit hardware_efficient_ansatz(int n_qubits, int layers) {
    if (n_qubits < 2) throw std::invalid_argument("hardware_efficient_ansatz: n_qubits < 2");
    if (layers < 1) throw std::invalid_argument("hardware_efficient_ansatz: layers < 1");
    Circuit c;
    c.n_qubits = n_qubits;
    c.depth = layers;
    c.input_type = InputType::Ground;
    int param = 0;
    for (int layer = 0; layer < layers; ++layer) {
        for (int q = 0; q < n_qubits; ++q)
            c.gates.push_back(make_rotation(GateKind::RY, q, param++, layer));
        for (int q = 0; q < n_qubits; ++q)
            c.gates.push_back(make_rotation(GateKind::RZ, q, param++, layer));
        detail::append_ring(c.gates, n_qubits, layer);
    }
    c.n_params = param;
    return c;
}

using Edge = std::pair<int, int>;

/**
 * QAOA MAX-CUT ansatz and cost for a 2-regular graph (one cycle).
 *
 * The circuit starts from the equal superposition; each of the p layers
 * applies the cost unitary (CNOT - RZ(gamma_k) - CNOT per edge, every edge
 * sharing gamma_k) and the mixer (RX(beta_k) on every qubit, shared beta_k).
 * The cost observable is sum over edges of (Z_i Z_j) / 2 with constant offset
 * -|E|/2: its expectation on a basis state is minus the number of cut edges.
 */
inline std::pair<Circuit, Observable> qaoa_maxcut(const std::vector<Edge> &edges,
                                                  int p_layers) {
    if (p_layers < 1) throw std::invalid_argument("qaoa_maxcut: p_layers < 1");
    int n_qubits = 0;
    for (const auto &[a, b] : edges) n_qubits = std::max({n_qubits, a + 1, b + 1});
    // 2-regular and connected <=> a single cycle: every vertex has degree 2
    // and |E| = |V|.
    std::vector<int> degree(static_cast<std::size_t>(n_qubits), 0);
    for (const auto &[a, b] : edges) {
        if (a == b) throw std::invalid_argument("qaoa_maxcut: self-loop");
        ++degree[static_cast<std::size_t>(a)];
        ++degree[static_cast<std::size_t>(b)];
    }
    if (edges.size() != static_cast<std::size_t>(n_qubits) ||
        !std::all_of(degree.begin(), degree.end(), [](int d) { return d == 2; }))
        throw std::invalid_argument("qaoa_maxcut: graph is not 2-regular");

    Circuit c;
    c.n_qubits = n_qubits;
    c.depth = p_layers;
    c.input_type = InputType::EqualSuperposition;
    c.n_params = 2 * p_layers;
    for (int k = 0; k < p_layers; ++k) {
        const int gamma = 2 * k;
        const int beta = 2 * k + 1;
        for (const auto &[i, j] : edges) {
            c.gates.push_back(make_cnot(i, j, k));
            c.gates.push_back(make_rotation(GateKind::RZ, j, gamma, k));
            c.gates.push_back(make_cnot(i, j, k));
        }
        for (int q = 0; q < n_qubits; ++q)
            c.gates.push_back(make_rotation(GateKind::RX, q, beta, k));
    }

    Observable cost;
    for (const auto &[i, j] : edges) {
        PauliTerm t;
        t.weight = 0.5;
        t.paulis = {{std::min(i, j), PauliAxis::Z}, {std::max(i, j), PauliAxis::Z}};
        cost.terms.push_back(std::move(t));
    }
    cost.constant_offset = -0.5 * static_cast<double>(edges.size());
    return {std::move(c), std::move(cost)};
}

/// Random cycle over a permutation of the vertices (connected 2-regular graph).
inline std::vector<Edge> random_cycle_graph(int n_vertices, Rng &rng) {
    if (n_vertices < 3) throw std::invalid_argument("random_cycle_graph: n < 3");
    std::vector<int> perm(static_cast<std::size_t>(n_vertices));
    for (int i = 0; i < n_vertices; ++i) perm[static_cast<std::size_t>(i)] = i;
    for (std::size_t i = perm.size() - 1; i > 0; --i)
        std::swap(perm[i], perm[rng.uniform_int(i + 1)]);
    std::vector<Edge> edges;
    for (int i = 0; i < n_vertices; ++i)
        edges.emplace_back(perm[static_cast<std::size_t>(i)],
                           perm[static_cast<std::size_t>((i + 1) % n_vertices)]);
    return edges;
}

/**
 * Random Hamiltonian of n_terms Pauli strings, weights uniform in [-1, 1],
 * each qubit's letter uniform over {I, X, Y, Z}; the all-identity string is
 * resampled so every term is traceless.
 */
inline Observable random_hamiltonian(int n_qubits, int n_terms, Rng &rng) {
    if (n_terms < 1) throw std::invalid_argument("random_hamiltonian: n_terms < 1");
    Observable obs;
    for (int t = 0; t < n_terms; ++t) {
        PauliTerm term;
        term.weight = rng.uniform(-1.0, 1.0);
        do {
            term.paulis.clear();
            for (int q = 0; q < n_qubits; ++q) {
                switch (rng.uniform_int(4)) {
                case 1: term.paulis.push_back({q, PauliAxis::X}); break;
                case 2: term.paulis.push_back({q, PauliAxis::Y}); break;
                case 3: term.paulis.push_back({q, PauliAxis::Z}); break;
                default: break; // identity
                }
            }
        } while (term.paulis.empty());
        obs.terms.push_back(std::move(term));
    }
    return obs;
}

} // namespace qvcopt
