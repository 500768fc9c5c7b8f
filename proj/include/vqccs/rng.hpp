#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include "vqccs/common.hpp"

namespace vqccs {

// Deterministic random stream. Every piece of randomness in the project is
// drawn from one of these; the distributions are built on the raw 64-bit
// output so sequences do not depend on standard-library internals.
//
// Substreams are derived from the parent's seed (not its position), so a
// dataset can be generated in parallel with per-index substreams and still
// be byte-identical to the serial run.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed);

    RandomStream substream(std::uint64_t index) const;
    RandomStream substream(std::string_view label) const;

    std::uint64_t next_u64();

    // Uniform in [0, 1) with 53-bit resolution.
    double uniform();

    // Uniform integer in [0, bound), rejection sampled to remove modulo bias.
    std::uint64_t uniform_below(std::uint64_t bound);

    // Standard normal via Box-Muller; pairs are cached.
    double normal();

    // Circularly symmetric complex Gaussian CN(0, variance).
    cplx complex_normal(double variance);

    // Uniform permutation of {0, ..., n-1} (Fisher-Yates).
    std::vector<int> permutation(int n);

    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_ = 0;
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace vqccs
