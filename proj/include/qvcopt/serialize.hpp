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
 * JSON schemas for circuits and observables (reproducible task exchange).
 *
 * Circuit schema:
 *   {"n_qubits": N, "depth": D, "input_type": "ground"|"equal_superposition",
 *    "n_params": P, "gates": [{"kind": "RX", "qubits": [q] | [c, t],
 *    "layer": L, "param_index": i? , "fixed_angle": a?}]}
 *
 * Observable schema:
 *   {"constant_offset": c, "terms": [{"weight": w,
 *    "paulis": [{"qubit": q, "axis": "X"|"Y"|"Z"}]}]}
 */

#pragma once

#include <string>

#include <json.hpp>

#include "qvcopt/circuit.hpp"

namespace qvcopt {

inline nlohmann::json circuit_to_json(const Circuit &c) {
    nlohmann::json gates = nlohmann::json::array();
    for (const auto &g : c.gates) {
        nlohmann::json jg;
        jg["kind"] = gate_name(g.kind);
        jg["qubits"] = g.n_qubits() == 2
                           ? nlohmann::json::array({g.qubits[0], g.qubits[1]})
                           : nlohmann::json::array({g.qubits[0]});
        jg["layer"] = g.layer;
        if (g.param_index) jg["param_index"] = *g.param_index;
        if (g.fixed_angle) jg["fixed_angle"] = *g.fixed_angle;
        gates.push_back(std::move(jg));
    }
    return nlohmann::json{
        {"n_qubits", c.n_qubits},
        {"depth", c.depth},
        {"input_type",
         c.input_type == InputType::Ground ? "ground" : "equal_superposition"},
        {"n_params", c.n_params},
        {"gates", std::move(gates)}};
}

inline GateKind gate_kind_from_name(const std::string &name) {
    if (name == "CNOT") return GateKind::CNOT;
    if (name == "H") return GateKind::H;
    if (name == "RX") return GateKind::RX;
    if (name == "RY") return GateKind::RY;
    if (name == "RZ") return GateKind::RZ;
    throw std::invalid_argument("circuit json: unknown gate kind " + name);
}

inline Circuit circuit_from_json(const nlohmann::json &j) {
    Circuit c;
    c.n_qubits = j.at("n_qubits").get<int>();
    c.depth = j.at("depth").get<int>();
    c.n_params = j.at("n_params").get<int>();
    const std::string input = j.at("input_type").get<std::string>();
    if (input == "ground") c.input_type = InputType::Ground;
    else if (input == "equal_superposition") c.input_type = InputType::EqualSuperposition;
    else throw std::invalid_argument("circuit json: unknown input_type " + input);
    for (const auto &jg : j.at("gates")) {
        GateInstance g;
        g.kind = gate_kind_from_name(jg.at("kind").get<std::string>());
        const auto &qs = jg.at("qubits");
        g.qubits[0] = qs.at(0).get<int>();
        g.qubits[1] = qs.size() > 1 ? qs.at(1).get<int>() : -1;
        g.layer = jg.value("layer", 0);
        if (jg.contains("param_index")) g.param_index = jg["param_index"].get<int>();
        if (jg.contains("fixed_angle")) g.fixed_angle = jg["fixed_angle"].get<double>();
        c.gates.push_back(std::move(g));
    }
    c.validate();
    return c;
}

inline nlohmann::json observable_to_json(const Observable &obs) {
    nlohmann::json terms = nlohmann::json::array();
    for (const auto &t : obs.terms) {
        nlohmann::json paulis = nlohmann::json::array();
        for (const auto &p : t.paulis)
            paulis.push_back({{"qubit", p.qubit},
                              {"axis", std::string(1, axis_letter(p.axis))}});
        terms.push_back({{"weight", t.weight}, {"paulis", std::move(paulis)}});
    }
    return nlohmann::json{{"constant_offset", obs.constant_offset},
                          {"terms", std::move(terms)}};
}

inline Observable observable_from_json(const nlohmann::json &j) {
    Observable obs;
    obs.constant_offset = j.value("constant_offset", 0.0);
    for (const auto &jt : j.at("terms")) {
        PauliTerm t;
        t.weight = jt.at("weight").get<double>();
        for (const auto &jp : jt.at("paulis")) {
            const std::string axis = jp.at("axis").get<std::string>();
            PauliAxis a;
            if (axis == "X") a = PauliAxis::X;
            else if (axis == "Y") a = PauliAxis::Y;
            else if (axis == "Z") a = PauliAxis::Z;
            else throw std::invalid_argument("observable json: unknown axis " + axis);
            t.paulis.push_back({jp.at("qubit").get<int>(), a});
        }
        obs.terms.push_back(std::move(t));
    }
    return obs;
}

} // namespace qvcopt
