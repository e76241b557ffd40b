// Copyright (c) 2026 The sgf Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

#include "sgf/errors.hpp"

namespace sgf {

// Counter-based pseudorandom stream built on the SplitMix64 finalizer
// (Steele, Lea & Flood; mixing constants by Vigna). The i-th draw of a
// stream is a pure function of (master_seed, stream_index, i), using only
// 64-bit integer arithmetic, so sequences are identical on every platform
// and any draw index can be reached without generating its predecessors.
//
// Distinct stream indexes give statistically independent sequences; one
// stream per caption keeps parallel generation schedule-independent.
class SeededRng {
public:
    SeededRng(std::uint64_t master_seed, std::uint64_t stream_index)
        : key_(mix(mix(master_seed + GOLDEN) ^ (stream_index + FLEA))) {}

    std::uint64_t master_key() const { return key_; }

    std::uint64_t next_u64() {
        counter_ += GOLDEN;
        return mix(key_ + counter_);
    }

    // Unbiased draw in [0, n) via rejection of the top 2^64 mod n values.
    std::uint64_t bounded(std::uint64_t n) {
        if (n == 0) throw InternalError("SeededRng::bounded called with n = 0");
        const std::uint64_t threshold = (0 - n) % n;  // 2^64 mod n
        for (;;) {
            const std::uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

    bool coin_flip() { return bounded(2) == 1; }

private:
    static constexpr std::uint64_t GOLDEN = 0x9E3779B97F4A7C15ull;
    static constexpr std::uint64_t FLEA = 0xBF58476D1CE4E5B9ull;

    static std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xBF58476D1CE4E5B9ull;
        z ^= z >> 27;
        z *= 0x94D049BB133111EBull;
        z ^= z >> 31;
        return z;
    }

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace sgf
