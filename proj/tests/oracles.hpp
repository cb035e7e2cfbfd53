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

// Independent test oracles. These deliberately avoid the library's fast
// paths: the depolarizing oracle manipulates literal density matrices, the
// MAX-CUT oracle enumerates bitstrings, and the ground-energy oracle
// diagonalizes the dense Hamiltonian.

#pragma once

#include <bit>
#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "qvcopt/circuit.hpp"
#include "qvcopt/statevector.hpp"

namespace qvcopt::oracles {

using CMat = Eigen::MatrixXcd;

inline CMat pauli_matrix(char letter) {
    CMat m(2, 2);
    const std::complex<double> i(0.0, 1.0);
    switch (letter) {
    case 'I': m << 1, 0, 0, 1; break;
    case 'X': m << 0, 1, 1, 0; break;
    case 'Y': m << 0, -i, i, 0; break;
    case 'Z': m << 1, 0, 0, -1; break;
    default: throw std::invalid_argument("pauli_matrix: bad letter");
    }
    return m;
}

inline CMat kron(const CMat &a, const CMat &b) {
    CMat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

/// Dense operator for a Pauli letter string over n qubits (qubit 0 leftmost,
/// matching the library's most-significant-bit convention).
inline CMat pauli_string_matrix(const std::string &letters) {
    CMat m = pauli_matrix(letters.empty() ? 'I' : letters[0]);
    for (std::size_t q = 1; q < letters.size(); ++q)
        m = kron(m, pauli_matrix(letters[q]));
    return m;
}

inline CMat observable_matrix(const Observable &obs, int n_qubits) {
    const Eigen::Index dim = Eigen::Index{1} << n_qubits;
    CMat m = CMat::Zero(dim, dim);
    for (const auto &term : obs.terms) {
        std::string letters(static_cast<std::size_t>(n_qubits), 'I');
        for (const auto &p : term.paulis)
            letters[static_cast<std::size_t>(p.qubit)] = axis_letter(p.axis);
        m += term.weight * pauli_string_matrix(letters);
    }
    m += obs.constant_offset * CMat::Identity(dim, dim);
    return m;
}

/// Literal implementation of rho -> (1-p) rho + p/(4^n - 1) sum_i P_i rho P_i
/// over all non-identity Pauli strings P_i.
inline CMat depolarize_density_matrix(const CMat &rho, int n_qubits, double p) {
    const auto dim = rho.rows();
    CMat out = (1.0 - p) * rho;
    const double pauli_count = std::pow(4.0, n_qubits) - 1.0;
    std::string letters(static_cast<std::size_t>(n_qubits), 'I');
    const char alphabet[4] = {'I', 'X', 'Y', 'Z'};
    const auto total = static_cast<std::uint64_t>(std::pow(4.0, n_qubits));
    for (std::uint64_t code = 1; code < total; ++code) {
        std::uint64_t c = code;
        for (int q = n_qubits - 1; q >= 0; --q) {
            letters[static_cast<std::size_t>(q)] = alphabet[c & 3];
            c >>= 2;
        }
        const CMat pauli = pauli_string_matrix(letters);
        out += (p / pauli_count) * pauli * rho * pauli;
    }
    (void)dim;
    return out;
}

/// Noisy expectation tr(O rho') computed entirely with density matrices.
inline double depolarized_expectation_oracle(const StateVector &state,
                                             const Observable &obs, double p) {
    const auto dim = static_cast<Eigen::Index>(state.dim());
    Eigen::VectorXcd psi(dim);
    for (Eigen::Index i = 0; i < dim; ++i) psi(i) = state[static_cast<std::size_t>(i)];
    const CMat rho = psi * psi.adjoint();
    const CMat noisy = depolarize_density_matrix(rho, state.n_qubits(), p);
    const CMat o = observable_matrix(obs, state.n_qubits());
    return (o * noisy).trace().real();
}

/// Exact ground energy by dense diagonalization (n <= 8).
inline double ground_energy(const Observable &obs, int n_qubits) {
    const CMat h = observable_matrix(obs, n_qubits);
    Eigen::SelfAdjointEigenSolver<CMat> solver(h);
    return solver.eigenvalues().minCoeff();
}

/// Evaluates a Z-diagonal cost observable on a computational basis state.
inline double basis_state_cost(const Observable &obs, int n_qubits,
                               std::uint64_t bits) {
    double value = obs.constant_offset;
    for (const auto &term : obs.terms) {
        int parity = 0;
        for (const auto &p : term.paulis)
            parity ^= static_cast<int>((bits >> (n_qubits - 1 - p.qubit)) & 1);
        value += parity ? -term.weight : term.weight;
    }
    return value;
}

/// MAX-CUT brute force: minimum of -(cut size) over all bitstrings.
inline double maxcut_min_cost(const std::vector<Edge> &edges, int n_vertices) {
    double best = 0.0;
    for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << n_vertices); ++bits) {
        int cut = 0;
        for (const auto &[a, b] : edges) {
            const int za = static_cast<int>((bits >> a) & 1);
            const int zb = static_cast<int>((bits >> b) & 1);
            cut += (za != zb) ? 1 : 0;
        }
        best = std::min(best, -static_cast<double>(cut));
    }
    return best;
}

} // namespace qvcopt::oracles
