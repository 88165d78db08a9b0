#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace hdl {

// Seedable random generator with a fully specified algorithm so that any
// seed reproduces the same stream on every platform and standard library.
// Core stream: std::mt19937_64 (bit-stable by the standard). All mappings
// from raw 64-bit words to doubles/ints are implemented here instead of
// relying on std::*_distribution, whose outputs are implementation-defined.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform on [0, 1) with 53 random bits.
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform on [a, b).
    double uniform(double a, double b) { return a + (b - a) * uniform01(); }

    // Uniform on [-w, w).
    double symmetric_uniform(double w) { return w * (2.0 * uniform01() - 1.0); }

    // +1 or -1 with equal probability.
    double sign() { return (next_u64() & 1u) ? 1.0 : -1.0; }

    // Uniform integer in [0, n). Rejection sampling, exact.
    std::uint64_t uniform_int(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return x % n;
    }

    // Standard normal via Box-Muller; the second value of each pair is
    // cached, so draws alternate between one and zero engine advances.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform01();
        double u2 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 6.283185307179586476925286766559 * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

    // Derives an independent stream seed from a master seed and a stream
    // index (SplitMix64 finalizer over the combined words).
    static std::uint64_t derive(std::uint64_t master, std::uint64_t stream) {
        std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (stream + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

  private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace hdl
