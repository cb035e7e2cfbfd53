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

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <numbers>

#include "oracles.hpp"
#include "qvcopt/circuit.hpp"
#include "qvcopt/rng.hpp"
#include "qvcopt/statevector.hpp"

using namespace qvcopt;
using Catch::Approx;

namespace {

Circuit random_circuit(int max_qubits, int max_depth, std::uint64_t seed) {
    Rng rng = Rng::from_seed(seed);
    return random_task_circuit(max_qubits, max_depth, rng);
}

ParamVector random_params(int n, std::uint64_t seed) {
    Rng rng = Rng::from_seed(seed).stream("params");
    ParamVector theta(static_cast<std::size_t>(n));
    for (double &t : theta) t = rng.uniform(-std::numbers::pi, std::numbers::pi);
    return theta;
}

} // namespace

TEST_CASE("single-qubit gate kernels", "[qsim]") {
    SECTION("H on |0>") {
        StateVector s(1);
        s.apply_h(0);
        REQUIRE(s[0].real() == Approx(1.0 / std::sqrt(2.0)));
        REQUIRE(s[1].real() == Approx(1.0 / std::sqrt(2.0)));
    }
    SECTION("Rz(0) is the identity") {
        StateVector s(2);
        s.apply_h(0);
        const StateVector before = s;
        s.apply_rz(0, 0.0);
        for (std::size_t i = 0; i < s.dim(); ++i)
            REQUIRE(std::abs(s[i] - before[i]) < 1e-15);
    }
    SECTION("Rx(pi) on |0> gives (0, -i)") {
        StateVector s(1);
        s.apply_rx(0, std::numbers::pi);
        REQUIRE(std::abs(s[0]) < 1e-15);
        REQUIRE(s[1].real() == Approx(0.0).margin(1e-15));
        REQUIRE(s[1].imag() == Approx(-1.0));
    }
}

TEST_CASE("CNOT uses qubit 0 as the most significant bit", "[qsim]") {
    // |10>: qubit 0 = 1, qubit 1 = 0 -> index 2.
    StateVector s(2);
    s[0] = 0.0;
    s[2] = 1.0;
    s.apply_cnot(0, 1);
    REQUIRE(std::abs(s[3] - std::complex<double>(1.0)) < 1e-15);
    REQUIRE(std::abs(s[2]) < 1e-15);

    SECTION("control == target is rejected") {
        REQUIRE_THROWS_AS(s.apply_cnot(1, 1), std::invalid_argument);
    }
    SECTION("out-of-range qubit is rejected") {
        REQUIRE_THROWS_AS(s.apply_h(2), std::out_of_range);
    }
}

TEST_CASE("expectation values of Z strings", "[qsim]") {
    SECTION("<0|Z|0> = 1") {
        StateVector s(1);
        REQUIRE(expectation(s, z_string({0})) == Approx(1.0));
    }
    SECTION("<Z> after Rx(pi/3) is cos(pi/3) = 0.5") {
        StateVector s(1);
        s.apply_rx(0, std::numbers::pi / 3.0);
        REQUIRE(expectation(s, z_string({0})) == Approx(0.5));
    }
    SECTION("H|0> has <Z> = 0") {
        StateVector s(1);
        s.apply_h(0);
        REQUIRE(expectation(s, z_string({0})) == Approx(0.0).margin(1e-15));
    }
    SECTION("Bell state has <ZZ> = 1") {
        StateVector s(2);
        s.apply_h(0);
        s.apply_cnot(0, 1);
        REQUIRE(expectation(s, z_string({0, 1})) == Approx(1.0));
    }
    SECTION("X and Y terms via basis rotation") {
        StateVector s(1);
        s.apply_h(0); // |+>: <X> = 1, <Y> = 0
        Observable x{{{1.0, {{0, PauliAxis::X}}}}, 0.0};
        Observable y{{{1.0, {{0, PauliAxis::Y}}}}, 0.0};
        REQUIRE(expectation(s, x) == Approx(1.0));
        REQUIRE(expectation(s, y) == Approx(0.0).margin(1e-12));
        s.apply_rz(0, std::numbers::pi / 2.0); // rotate <X> into <Y>
        REQUIRE(expectation(s, y) == Approx(1.0));
    }
}

TEST_CASE("norm preservation and unitarity on random circuits", "[qsim]") {
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        const Circuit c = random_circuit(10, 20, seed);
        const ParamVector theta = random_params(c.n_params, seed);
        StateVector s = c.input_type == InputType::Ground
                            ? StateVector::ground(c.n_qubits)
                            : StateVector::equal_superposition(c.n_qubits);
        for (const auto &g : c.gates) apply_gate(s, g, theta);
        REQUIRE(std::abs(s.norm_sq() - 1.0) < 1e-10);

        // Un-apply in reverse restores the input state.
        ParamVector negated = theta;
        for (double &t : negated) t = -t;
        for (auto it = c.gates.rbegin(); it != c.gates.rend(); ++it) {
            GateInstance g = *it;
            apply_gate(s, g, negated);
        }
        StateVector input = c.input_type == InputType::Ground
                                ? StateVector::ground(c.n_qubits)
                                : StateVector::equal_superposition(c.n_qubits);
        for (std::size_t i = 0; i < s.dim(); ++i)
            REQUIRE(std::abs(s[i] - input[i]) < 1e-10);
    }
}

TEST_CASE("gate locality: other qubits' marginals are unchanged", "[qsim]") {
    StateVector s(3);
    s.apply_ry(0, 0.3);
    s.apply_ry(1, 1.1);
    s.apply_ry(2, 2.2);
    const double z1 = expectation(s, z_string({1}));
    const double z2 = expectation(s, z_string({2}));
    s.apply_rx(0, 0.9);
    s.apply_h(0);
    REQUIRE(expectation(s, z_string({1})) == Approx(z1));
    REQUIRE(expectation(s, z_string({2})) == Approx(z2));
}

TEST_CASE("shot sampling", "[qsim]") {
    SECTION("zero-variance eigenstate gives exactly 1") {
        StateVector s(3);
        Rng rng = Rng::from_seed(7);
        REQUIRE(sample_expectation(s, z_string({0}), 64, rng) == 1.0);
    }
    SECTION("empirical std over 1000 seeds matches binomial prediction") {
        StateVector s(1);
        s.apply_h(0);
        const Observable z = z_string({0});
        double sum = 0.0, sum_sq = 0.0;
        const int reps = 1000;
        for (int rep = 0; rep < reps; ++rep) {
            Rng rng = Rng::from_seed(1234).stream(static_cast<std::uint64_t>(rep));
            const double est = sample_expectation(s, z, 1000, rng);
            REQUIRE(est >= -0.3);
            REQUIRE(est <= 0.3);
            sum += est;
            sum_sq += est * est;
        }
        const double mean = sum / reps;
        const double stdev = std::sqrt((sum_sq - reps * mean * mean) / (reps - 1));
        const double predicted = std::sqrt(1.0 / 1000.0); // sqrt((1 - E^2)/shots)
        REQUIRE(stdev == Approx(predicted).epsilon(0.15));
        // Unbiasedness: mean within 4 standard errors of the exact value 0.
        REQUIRE(std::abs(mean) < 4.0 * predicted / std::sqrt(double(reps)));
    }
    SECTION("large-shot concentration") {
        StateVector s(2);
        s.apply_ry(0, 0.7);
        s.apply_cnot(0, 1);
        const Observable obs = z_string({0});
        const double exact = expectation(s, obs);
        Rng rng = Rng::from_seed(99);
        const std::uint64_t shots = 1'000'000;
        const double est = sample_expectation(s, obs, shots, rng);
        const double bound = 5.0 * std::sqrt((1.0 - exact * exact) / double(shots));
        REQUIRE(std::abs(est - exact) < bound);
    }
    SECTION("shots = 0 is rejected") {
        StateVector s(1);
        Rng rng;
        REQUIRE_THROWS_AS(sample_expectation(s, z_string({0}), 0, rng),
                          std::invalid_argument);
    }
}

TEST_CASE("depolarizing channel on expectations", "[qsim]") {
    SECTION("p = 0 leaves values unchanged") {
        REQUIRE(depolarize_expectation(0.731, 4, 0.0) == 0.731);
    }
    SECTION("n = 1, p = 0.075 scales by 0.9") {
        REQUIRE(depolarize_expectation(1.0, 1, 0.075) == Approx(0.9));
    }
    SECTION("n = 2, p = 0.075 scales by 0.92") {
        REQUIRE(depolarize_expectation(1.0, 2, 0.075) == Approx(0.92));
    }
    SECTION("p outside [0, 1) is rejected") {
        REQUIRE_THROWS_AS(depolarize_expectation(1.0, 1, 1.0), std::invalid_argument);
        REQUIRE_THROWS_AS(depolarize_expectation(1.0, 1, -0.1), std::invalid_argument);
    }
    SECTION("matches the literal density-matrix channel for n <= 3") {
        for (int n = 1; n <= 3; ++n) {
            for (double p : {0.0, 0.075, 0.3}) {
                Rng rng = Rng::from_seed(42 + static_cast<std::uint64_t>(n));
                StateVector s(n);
                for (int q = 0; q < n; ++q) {
                    s.apply_ry(q, rng.uniform(-3.0, 3.0));
                    s.apply_rz(q, rng.uniform(-3.0, 3.0));
                }
                for (int q = 0; q + 1 < n; ++q) s.apply_cnot(q, q + 1);
                Observable obs = random_hamiltonian(n, 4, rng);
                obs.constant_offset = 0.0;
                const double noisy = depolarize_expectation(expectation(s, obs), n, p);
                const double oracle = oracles::depolarized_expectation_oracle(s, obs, p);
                REQUIRE(noisy == Approx(oracle).margin(1e-12));
            }
        }
    }
}
