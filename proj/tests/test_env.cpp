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
#include <numbers>

#include "qvcopt/env.hpp"

using namespace qvcopt;
using Catch::Approx;

namespace {

EpisodeTask rx_task(double target) {
    EpisodeTask task;
    task.circuit.n_qubits = 1;
    task.circuit.depth = 1;
    task.circuit.n_params = 1;
    task.circuit.gates.push_back(make_rotation(GateKind::RX, 0, 0, 0));
    task.cost_kind = ReadoutKind::FirstZ;
    task.cost = readout_cost(ReadoutKind::FirstZ, 1);
    task.target = target;
    return task;
}

EnvConfig one_qubit_config(int horizon = 10) {
    EnvConfig cfg;
    cfg.max_qubits = 1;
    cfg.max_depth = 1;
    cfg.horizon = horizon;
    return cfg;
}

} // namespace

TEST_CASE("reset draws reproducible tasks", "[env]") {
    QvcEnv a(EnvConfig::desk(), 42);
    QvcEnv b(EnvConfig::desk(), 42);
    for (int episode = 0; episode < 3; ++episode) {
        a.reset();
        b.reset();
        REQUIRE(a.task().circuit.n_qubits == b.task().circuit.n_qubits);
        REQUIRE(a.task().circuit.depth == b.task().circuit.depth);
        REQUIRE(a.task().cost_kind == b.task().cost_kind);
        REQUIRE(a.task().target == b.task().target);
        REQUIRE(a.params() == b.params());
    }
}

TEST_CASE("targets stay within the cost's attainable range", "[env]") {
    QvcEnv env(EnvConfig::desk(), 7);
    for (int episode = 0; episode < 40; ++episode) {
        env.reset();
        const int n = env.task().circuit.n_qubits;
        const auto [lo, hi] = readout_range(env.task().cost_kind, n);
        REQUIRE(env.task().target >= lo);
        REQUIRE(env.task().target <= hi);
        if (env.task().cost_kind != ReadoutKind::SumZ) {
            REQUIRE(env.task().target >= -1.0);
            REQUIRE(env.task().target <= 1.0);
        }
    }
}

TEST_CASE("encoding shapes are constant across episodes", "[env]") {
    QvcEnv env(EnvConfig::desk(), 3);
    for (int episode = 0; episode < 5; ++episode) {
        const Observations obs = env.reset();
        REQUIRE(obs.feature.shape == std::vector<std::size_t>{36, 8});
        REQUIRE(obs.block.shape == std::vector<std::size_t>{5, 6, 6});
    }
}

TEST_CASE("feature encoding layout", "[env]") {
    EnvConfig cfg = EnvConfig::desk();
    Circuit c;
    c.n_qubits = 3;
    c.depth = 2;
    c.n_params = 3;
    c.input_type = InputType::EqualSuperposition;
    c.gates.push_back(make_rotation(GateKind::RX, 0, 0, 0));
    c.gates.push_back(make_rotation(GateKind::RY, 1, 1, 0));
    c.gates.push_back(make_cnot(0, 1, 0));
    c.gates.push_back(make_rotation(GateKind::RZ, 2, 2, 1));

    const ParamVector theta{0.5, -1.0, 2.5};
    const Tensor f = feature_encode(c, theta, 0.125, cfg);

    SECTION("row contents") {
        // Row 1: RY on qubit 1, layer 0.
        const double *row = f.data.data() + 8;
        REQUIRE(row[0] == 0.125);
        REQUIRE(row[1] == -1.0);
        REQUIRE(row[2] == 0.5);                 // RY code
        REQUIRE(row[3] == Approx(1.0 / 6.0));   // qubit / max_qubits
        REQUIRE(row[4] == 0.0);                 // layer / max_depth
        REQUIRE(row[5] == Approx(3.0 / 6.0));   // n_qubits / max_qubits
        REQUIRE(row[6] == Approx(2.0 / 6.0));   // depth / max_depth
        REQUIRE(row[7] == 1.0);                 // equal superposition
    }
    SECTION("padding rows are zero") {
        for (std::size_t p = 3; p < 36; ++p)
            for (std::size_t k = 0; k < 8; ++k)
                REQUIRE(f.data[p * 8 + k] == 0.0);
    }
    SECTION("zero error zeroes the error column") {
        const Tensor g = feature_encode(c, theta, 0.0, cfg);
        for (std::size_t p = 0; p < 3; ++p) REQUIRE(g.data[p * 8] == 0.0);
    }
}

TEST_CASE("block encoding layout", "[env]") {
    EnvConfig cfg = EnvConfig::desk();
    Circuit c;
    c.n_qubits = 4;
    c.depth = 6;
    c.n_params = 1;
    c.gates.push_back(make_rotation(GateKind::RY, 2, 0, 5));
    const ParamVector theta{0.7};
    const Tensor b = block_encode(c, theta, 0.25, cfg);

    SECTION("single RY(0.7) at qubit 2, layer 5 -> sheet 1 entry (2,5)") {
        int nonzero = 0;
        for (int q = 0; q < 6; ++q)
            for (int l = 0; l < 6; ++l)
                if (block_at(b, q, l, 1) != 0.0) {
                    ++nonzero;
                    REQUIRE(q == 2);
                    REQUIRE(l == 5);
                    REQUIRE(block_at(b, q, l, 1) == 0.7);
                }
        REQUIRE(nonzero == 1);
    }
    SECTION("sheets 0 and 2 are all zero") {
        for (int q = 0; q < 6; ++q)
            for (int l = 0; l < 6; ++l) {
                REQUIRE(block_at(b, q, l, 0) == 0.0);
                REQUIRE(block_at(b, q, l, 2) == 0.0);
            }
    }
    SECTION("sheets 3 and 4 are constant planes") {
        for (int q = 0; q < 6; ++q)
            for (int l = 0; l < 6; ++l) {
                REQUIRE(block_at(b, q, l, 3) == 0.0);  // ground input
                REQUIRE(block_at(b, q, l, 4) == 0.25); // error plane
            }
    }
}

TEST_CASE("step applies actions, rewards negative MSE", "[env]") {
    QvcEnv env(one_qubit_config(), rx_task(-1.0), 5);
    env.reset();

    SECTION("action reaching the target earns reward 0") {
        const auto out = env.step(std::vector<double>{std::numbers::pi});
        REQUIRE(out.reward == Approx(0.0).margin(1e-20));
    }
    SECTION("theta = 0 earns reward -4") {
        const auto out = env.step(std::vector<double>{0.0});
        REQUIRE(out.reward == Approx(-4.0));
    }
    SECTION("done exactly at the horizon") {
        for (int t = 0; t < 9; ++t)
            REQUIRE_FALSE(env.step(std::vector<double>{0.3}).done);
        REQUIRE(env.step(std::vector<double>{0.3}).done);
    }
    SECTION("wrong action length is rejected") {
        REQUIRE_THROWS_AS(env.step(std::vector<double>{0.1, 0.2}),
                          std::invalid_argument);
    }
    SECTION("observation error equals -reward") {
        const auto out = env.step(std::vector<double>{0.0});
        REQUIRE(out.obs.feature.data[0] == Approx(-out.reward));
        REQUIRE(block_at(out.obs.block, 0, 0, 4) == Approx(-out.reward));
    }
}

TEST_CASE("action components past n_params are truncated", "[env]") {
    EnvConfig cfg = one_qubit_config();
    cfg.max_qubits = 2;
    cfg.max_depth = 2; // max_params = 4 while the task has 1 parameter
    QvcEnv env(cfg, rx_task(-1.0), 5);
    env.reset();
    const auto a = env.step(std::vector<double>{1.0, 9.0, 9.0, 9.0});
    QvcEnv env2(cfg, rx_task(-1.0), 5);
    env2.reset();
    const auto b = env2.step(std::vector<double>{1.0, -9.0, 0.0, 3.0});
    REQUIRE(a.reward == b.reward);
}

TEST_CASE("reward is non-positive and zero only at the target", "[env]") {
    QvcEnv env(EnvConfig::desk(), 11);
    env.reset();
    Rng rng = Rng::from_seed(17);
    std::vector<double> action(static_cast<std::size_t>(env.max_params()));
    for (int t = 0; t < 20; ++t) {
        for (double &a : action) a = rng.uniform(-std::numbers::pi, std::numbers::pi);
        auto out = env.step(action);
        if (out.done) env.reset();
        REQUIRE(out.reward <= 0.0);
    }
}

TEST_CASE("deterministic trajectories without shots", "[env]") {
    auto run = [](std::uint64_t seed) {
        QvcEnv env(EnvConfig::desk(), seed);
        env.reset();
        Rng arng = Rng::from_seed(23);
        std::vector<double> rewards;
        std::vector<double> action(static_cast<std::size_t>(env.max_params()));
        for (int t = 0; t < 12; ++t) {
            for (double &a : action) a = arng.uniform(-1.0, 1.0);
            auto out = env.step(action);
            rewards.push_back(out.reward);
            if (out.done) env.reset();
        }
        return rewards;
    };
    REQUIRE(run(9) == run(9));
}

TEST_CASE("external error feed", "[env]") {
    EnvConfig cfg = EnvConfig::desk();
    const Circuit c = hardware_efficient_ansatz(3, 2);
    ParamVector theta(static_cast<std::size_t>(c.n_params), 0.4);

    SECTION("zero loss zeroes error entries") {
        const Observations obs = external_error_feed(c, theta, 0.0, cfg);
        for (std::size_t p = 0; p < static_cast<std::size_t>(c.n_params); ++p)
            REQUIRE(obs.feature.data[p * 8] == 0.0);
        for (int q = 0; q < 6; ++q)
            for (int l = 0; l < 6; ++l) REQUIRE(block_at(obs.block, q, l, 4) == 0.0);
    }
    SECTION("two fed losses differ only in the error entries") {
        const Observations a = external_error_feed(c, theta, 0.33, cfg);
        const Observations b = external_error_feed(c, theta, 0.77, cfg);
        for (std::size_t p = 0; p < a.feature.data.size(); ++p) {
            if (p % 8 == 0 && p / 8 < static_cast<std::size_t>(c.n_params))
                continue; // error column
            REQUIRE(a.feature.data[p] == b.feature.data[p]);
        }
        REQUIRE(a.feature.data[0] == 0.33);
        REQUIRE(b.feature.data[0] == 0.77);
    }
    SECTION("loss value round-trips unchanged") {
        const Observations obs = external_error_feed(c, theta, 1.23456, cfg);
        REQUIRE(obs.feature.data[0] == 1.23456);
        REQUIRE(block_at(obs.block, 5, 5, 4) == 1.23456);
    }
    SECTION("oversized circuits are rejected") {
        const Circuit big = hardware_efficient_ansatz(7, 2);
        ParamVector tbig(static_cast<std::size_t>(big.n_params), 0.0);
        REQUIRE_THROWS_AS(external_error_feed(big, tbig, 0.0, cfg),
                          std::invalid_argument);
    }
}

TEST_CASE("deep circuits clamp into the last block-encoding layer", "[env]") {
    EnvConfig cfg = EnvConfig::desk();
    Rng rng = Rng::from_seed(2);
    auto [circuit, cost] = qaoa_maxcut(random_cycle_graph(5, rng), 10);
    ParamVector theta(static_cast<std::size_t>(circuit.n_params), 0.1);
    const Observations obs = external_error_feed(circuit, theta, 0.5, cfg);
    REQUIRE(obs.block.shape == std::vector<std::size_t>{5, 6, 6});
    // RZ gates from layers >= 6 land in layer 5.
    bool found = false;
    for (int q = 0; q < 5; ++q) found = found || block_at(obs.block, q, 5, 2) != 0.0;
    REQUIRE(found);
}
