// Copyright 2026 The emo-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>

namespace emo {

/// Splittable counter-based random stream. Every draw is a pure function of
/// (key, counter), so streams can be forked for parallel work without shared
/// state and replayed bit-exactly from their seed.
class RngStream {
public:
    explicit RngStream(uint64_t seed) : key_(mix(seed ^ 0x6A09E667F3BCC909ull)), ctr_(0) {}

    uint64_t next_u64() {
        ctr_ += 0x9E3779B97F4A7C15ull;
        return mix(key_ ^ mix(ctr_));
    }

    /// Uniform in [0, 1) with 53 bits of mantissa.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Box-Muller; draws exactly two words per call (no cached spare, so the
    /// stream position is independent of call interleaving).
    double gauss(double mu, double sigma) {
        double u1 = 1.0 - uniform01();
        double u2 = uniform01();
        double r = std::sqrt(-2.0 * std::log(u1));
        return mu + sigma * r * std::cos(6.283185307179586477 * u2);
    }

    size_t index(size_t n) { return static_cast<size_t>(next_u64() % n); }

    /// Independent child stream; does not advance this stream.
    RngStream split(uint64_t child) const {
        return RngStream(mix(key_ + 0xD1B54A32D192ED03ull * (child + 1)));
    }

private:
    static uint64_t mix(uint64_t z) {
        z += 0x9E3779B97F4A7C15ull;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    uint64_t key_;
    uint64_t ctr_;
};

} // namespace emo
