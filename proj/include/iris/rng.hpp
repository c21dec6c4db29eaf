/*
 * rng.hpp - seeded pseudo-random generation.
 *
 * Every randomized stage of the pipeline must be bit-reproducible across
 * platforms and standard libraries, so the generator (xoshiro256++) and the
 * gaussian transform are implemented here instead of relying on <random>
 * distributions, whose output is implementation-defined.
 */
#pragma once

#include <cstdint>
#include <string_view>

namespace iris {

// Stream-splitting / seed expansion helper.
struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
};

// xoshiro256++ (Blackman & Vigna), seeded via SplitMix64.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64();

    // Uniform in [0, 1), 53-bit resolution.
    double next_double();

    // Uniform integer in [0, n); n > 0.
    std::uint64_t next_below(std::uint64_t n);

    // Standard normal via Box-Muller (one draw per call, no cached spare).
    double next_gaussian();

private:
    std::uint64_t s_[4];
};

// Labeled seed derivation: stages draw their seeds as a pure function of
// (base seed, label, index) so pipeline stages are independently
// reproducible regardless of execution order.
std::uint64_t derive_seed(std::uint64_t base, std::string_view label, std::uint64_t index = 0);

} // namespace iris
