// Copyright 2026 The andloc Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file rng.hpp
 * @brief Deterministic per-task random streams.
 *
 * Every parallel task owns a stream seeded by
 *
 *   derive_seed(master, stream, index)
 *     = splitmix64(splitmix64(splitmix64(master) ^ stream) ^ index)
 *
 * and draws from std::mt19937_64, whose output sequence is fixed by the C++
 * standard. Uniforms take the top 53 bits of each draw, so a reimplementation
 * in another language reproduces the streams bit for bit.
 */

#pragma once

#include <cstdint>
#include <random>

namespace andloc {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Stream identifiers; one per consumer so that commands never share draws.
enum class StreamId : std::uint64_t {
    lyapunov = 1,
    ids = 2,
    localize = 3,
    shooting = 4,
    test = 99,
};

constexpr std::uint64_t derive_seed(std::uint64_t master, StreamId stream,
                                    std::uint64_t index) noexcept {
    return splitmix64(splitmix64(splitmix64(master) ^ static_cast<std::uint64_t>(stream)) ^ index);
}

class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : engine_(seed) {}
    RandomStream(std::uint64_t master, StreamId stream, std::uint64_t index)
        : engine_(derive_seed(master, stream, index)) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform double in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

private:
    std::mt19937_64 engine_;
};

}  // namespace andloc
