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
 * Counter-based random number generation with named, splittable streams.
 *
 * Every run derives its randomness from a single master seed; subsystems
 * (environment, agent init, shot sampling, ...) obtain independent streams
 * by label so that adding draws in one subsystem never perturbs another.
 */

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace qvcopt {

namespace detail {

/// SplitMix64 output mixer (Steele, Lea, Flood 2014).
constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace detail

/**
 * Counter-based generator: the stream is a pure function of (key, counter).
 *
 * next_u64() is SplitMix64 over an incrementing counter, so generator state
 * is two integers and serializes trivially. Child streams are derived by
 * mixing a label into the key; parent and child never collide in practice.
 */
class Rng {
  public:
    Rng() : Rng(0) {}
    explicit Rng(std::uint64_t key, std::uint64_t counter = 0)
        : key_(key), counter_(counter) {}

    static Rng from_seed(std::uint64_t master_seed) {
        return Rng(detail::mix64(master_seed ^ 0x9e3779b97f4a7c15ULL));
    }

    /// Independent stream for a named subsystem.
    [[nodiscard]] Rng stream(std::string_view label) const {
        return Rng(detail::mix64(key_ ^ detail::fnv1a(label)));
    }

    /// Independent stream for an integer salt (seed indices, shot batches).
    [[nodiscard]] Rng stream(std::uint64_t salt) const {
        return Rng(detail::mix64(key_ + 0x9e3779b97f4a7c15ULL * (salt + 1)));
    }

    std::uint64_t next_u64() {
        return detail::mix64(key_ + 0x9e3779b97f4a7c15ULL * ++counter_);
    }

    /// Uniform in [0, 1) with 53-bit resolution.
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n). Lemire's multiply-shift reduction.
    std::uint64_t uniform_int(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    /// Standard normal via Box-Muller (stateless: one draw per call pair).
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * std::numbers::pi * u2);
    }

    std::uint64_t key() const { return key_; }
    std::uint64_t counter() const { return counter_; }

  private:
    std::uint64_t key_;
    std::uint64_t counter_;
};

} // namespace qvcopt
