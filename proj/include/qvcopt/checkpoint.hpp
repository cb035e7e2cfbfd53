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
 * Agent checkpoints: a versioned binary container with the magic bytes
 * "QVCRL", a little-endian u32 version, a JSON header (agent kind, the
 * training-environment echo, SAC hyperparameters, block directory), and raw
 * little-endian float64 weight blocks in header order.
 */

#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "qvcopt/env.hpp"
#include "qvcopt/sac.hpp"

namespace qvcopt {

struct CheckpointError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

constexpr char kCheckpointMagic[5] = {'Q', 'V', 'C', 'R', 'L'};
constexpr std::uint32_t kCheckpointVersion = 1;

inline void write_u32(std::ostream &out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
    out.write(reinterpret_cast<const char *>(b), 4);
}

inline std::uint32_t read_u32(std::istream &in) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char *>(b), 4))
        throw CheckpointError("checkpoint: truncated file");
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) |
           (static_cast<std::uint32_t>(b[3]) << 24);
}

// Host doubles are IEEE-754; on a little-endian host the block is a straight
// memory write, otherwise bytes are swapped explicitly.
inline void write_f64_block(std::ostream &out, std::span<const double> data) {
    if constexpr (std::endian::native == std::endian::little) {
        out.write(reinterpret_cast<const char *>(data.data()),
                  static_cast<std::streamsize>(data.size() * sizeof(double)));
    } else {
        for (double v : data) {
            std::uint64_t bits;
            std::memcpy(&bits, &v, 8);
            for (int i = 0; i < 8; ++i)
                out.put(static_cast<char>((bits >> (8 * i)) & 0xff));
        }
    }
}

inline void read_f64_block(std::istream &in, std::span<double> data) {
    if constexpr (std::endian::native == std::endian::little) {
        if (!in.read(reinterpret_cast<char *>(data.data()),
                     static_cast<std::streamsize>(data.size() * sizeof(double))))
            throw CheckpointError("checkpoint: truncated weight block");
    } else {
        for (double &v : data) {
            std::uint64_t bits = 0;
            for (int i = 0; i < 8; ++i) {
                const int c = in.get();
                if (c < 0) throw CheckpointError("checkpoint: truncated weight block");
                bits |= static_cast<std::uint64_t>(c & 0xff) << (8 * i);
            }
            std::memcpy(&v, &bits, 8);
        }
    }
}

template <class Fn> void for_each_block(SacAgent &agent, Fn &&fn) {
    fn("policy", agent.policy().params());
    auto q_blocks = [&](const char *prefix, QNetwork &q) {
        if (q.encoder) fn((std::string(prefix) + ".encoder").c_str(), q.encoder->params());
        fn((std::string(prefix) + ".head").c_str(), q.head.params());
    };
    q_blocks("q1", agent.q1());
    q_blocks("q2", agent.q2());
    q_blocks("q1_target", agent.q1_target());
    q_blocks("q2_target", agent.q2_target());
    auto adam_blocks = [&](const char *prefix, AdamState &st) {
        fn((std::string(prefix) + ".m").c_str(), std::span<double>(st.m));
        fn((std::string(prefix) + ".v").c_str(), std::span<double>(st.v));
    };
    adam_blocks("policy_opt", agent.policy_opt());
    adam_blocks("q1_opt", agent.q1_opt());
    adam_blocks("q2_opt", agent.q2_opt());
    adam_blocks("alpha_opt", agent.alpha_opt());
}

} // namespace detail

inline nlohmann::json checkpoint_header(const SacAgent &agent, const EnvConfig &env,
                                        ObsKind kind) {
    const SacConfig &cfg = agent.config();
    nlohmann::json blocks = nlohmann::json::array();
    detail::for_each_block(const_cast<SacAgent &>(agent),
                           [&](const char *name, std::span<double> data) {
                               blocks.push_back({{"name", name}, {"size", data.size()}});
                           });
    return nlohmann::json{
        {"format_version", detail::kCheckpointVersion},
        {"kind", kind == ObsKind::Feature ? "mlp" : "cnn"},
        {"env",
         {{"max_qubits", env.max_qubits},
          {"max_depth", env.max_depth},
          {"horizon", env.horizon}}},
        {"action_dim", agent.action_dim()},
        {"obs_shape", agent.obs_shape()},
        {"sac",
         {{"gamma", cfg.gamma},
          {"tau", cfg.tau},
          {"lr", cfg.lr},
          {"hidden", cfg.hidden},
          {"batch_size", cfg.batch_size},
          {"buffer_capacity", cfg.buffer_capacity},
          {"warmup_steps", cfg.warmup_steps},
          {"updates_per_step", cfg.updates_per_step},
          {"action_scale", cfg.action_scale},
          {"log_std_min", cfg.log_std_min},
          {"log_std_max", cfg.log_std_max},
          {"init_alpha", cfg.init_alpha},
          {"target_entropy", agent.target_entropy()}}},
        {"log_alpha", agent.log_alpha()},
        {"adam_steps",
         {{"policy", agent.policy_opt().step},
          {"q1", agent.q1_opt().step},
          {"q2", agent.q2_opt().step},
          {"alpha", agent.alpha_opt().step}}},
        {"rng",
         {{"key", std::to_string(agent.rng().key())},
          {"counter", std::to_string(agent.rng().counter())}}},
        {"blocks", std::move(blocks)}};
}

inline void save_checkpoint(const std::string &path, const SacAgent &agent,
                            const EnvConfig &env, ObsKind kind) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw CheckpointError("checkpoint: cannot open " + path + " for writing");
    const std::string header = checkpoint_header(agent, env, kind).dump();
    out.write(detail::kCheckpointMagic, 5);
    detail::write_u32(out, detail::kCheckpointVersion);
    detail::write_u32(out, static_cast<std::uint32_t>(header.size()));
    out.write(header.data(), static_cast<std::streamsize>(header.size()));
    detail::for_each_block(const_cast<SacAgent &>(agent),
                           [&](const char *, std::span<double> data) {
                               detail::write_f64_block(out, data);
                           });
    if (!out) throw CheckpointError("checkpoint: write failed for " + path);
}

/// Reads and validates only the header.
inline nlohmann::json inspect_checkpoint(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CheckpointError("checkpoint: cannot open " + path);
    char magic[5];
    if (!in.read(magic, 5) || std::memcmp(magic, detail::kCheckpointMagic, 5) != 0)
        throw CheckpointError("checkpoint: bad magic (not a QVCRL file)");
    const std::uint32_t version = detail::read_u32(in);
    if (version != detail::kCheckpointVersion)
        throw CheckpointError("checkpoint: unsupported format version " +
                              std::to_string(version));
    const std::uint32_t header_len = detail::read_u32(in);
    std::string header(header_len, '\0');
    if (!in.read(header.data(), header_len))
        throw CheckpointError("checkpoint: truncated header");
    try {
        return nlohmann::json::parse(header);
    } catch (const nlohmann::json::exception &e) {
        throw CheckpointError(std::string("checkpoint: malformed header: ") + e.what());
    }
}

struct LoadedAgent {
    SacAgent agent;
    EnvConfig env;
    ObsKind kind;
};

/**
 * Rebuilds the agent from a checkpoint. The architecture is reconstructed
 * from the header's configuration echo; block sizes are validated against it
 * before the weights stream in.
 */
inline LoadedAgent load_checkpoint(const std::string &path) {
    const nlohmann::json header = inspect_checkpoint(path);
    std::ifstream in(path, std::ios::binary);
    {
        char magic[5];
        in.read(magic, 5);
        (void)detail::read_u32(in);
        const std::uint32_t header_len = detail::read_u32(in);
        in.seekg(static_cast<std::streamoff>(header_len), std::ios::cur);
    }

    const std::string kind_name = header.at("kind").get<std::string>();
    if (kind_name != "mlp" && kind_name != "cnn")
        throw CheckpointError("checkpoint: unknown agent kind " + kind_name);
    const ObsKind kind = kind_name == "mlp" ? ObsKind::Feature : ObsKind::Block;

    EnvConfig env;
    env.max_qubits = header.at("env").at("max_qubits").get<int>();
    env.max_depth = header.at("env").at("max_depth").get<int>();
    env.horizon = header.at("env").at("horizon").get<int>();

    const auto &jc = header.at("sac");
    SacConfig cfg;
    cfg.gamma = jc.at("gamma").get<double>();
    cfg.tau = jc.at("tau").get<double>();
    cfg.lr = jc.at("lr").get<double>();
    cfg.hidden = jc.at("hidden").get<std::size_t>();
    cfg.batch_size = jc.at("batch_size").get<std::size_t>();
    cfg.buffer_capacity = jc.at("buffer_capacity").get<std::size_t>();
    cfg.warmup_steps = jc.at("warmup_steps").get<std::size_t>();
    cfg.updates_per_step = jc.at("updates_per_step").get<int>();
    cfg.action_scale = jc.at("action_scale").get<double>();
    cfg.log_std_min = jc.at("log_std_min").get<double>();
    cfg.log_std_max = jc.at("log_std_max").get<double>();
    cfg.init_alpha = jc.at("init_alpha").get<double>();
    cfg.target_entropy = jc.at("target_entropy").get<double>();

    const auto obs_shape = header.at("obs_shape").get<std::vector<std::size_t>>();
    const auto action_dim = header.at("action_dim").get<std::size_t>();

    LoadedAgent loaded{
        SacAgent(obs_shape, action_dim, cfg, Rng::from_seed(0), kind == ObsKind::Block),
        env, kind};
    SacAgent &agent = loaded.agent;

    std::size_t block_index = 0;
    const auto &blocks = header.at("blocks");
    detail::for_each_block(agent, [&](const char *name, std::span<double> data) {
        if (block_index >= blocks.size())
            throw CheckpointError("checkpoint: missing block " + std::string(name));
        const auto &jb = blocks.at(block_index++);
        if (jb.at("name").get<std::string>() != name ||
            jb.at("size").get<std::size_t>() != data.size())
            throw CheckpointError("checkpoint: block mismatch at " + std::string(name) +
                                  " (architecture echo does not match)");
        detail::read_f64_block(in, data);
    });

    agent.log_alpha() = header.at("log_alpha").get<double>();
    agent.policy_opt().step = header.at("adam_steps").at("policy").get<std::size_t>();
    agent.q1_opt().step = header.at("adam_steps").at("q1").get<std::size_t>();
    agent.q2_opt().step = header.at("adam_steps").at("q2").get<std::size_t>();
    agent.alpha_opt().step = header.at("adam_steps").at("alpha").get<std::size_t>();
    agent.rng() = Rng(std::stoull(header.at("rng").at("key").get<std::string>()),
                      std::stoull(header.at("rng").at("counter").get<std::string>()));
    return loaded;
}

} // namespace qvcopt
