#include "vqccs/rng.hpp"

#include <cmath>

namespace vqccs {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

}  // namespace

RandomStream::RandomStream(std::uint64_t seed) : seed_(seed), gen_(splitmix64(seed)) {}

RandomStream RandomStream::substream(std::uint64_t index) const {
    return RandomStream(splitmix64(seed_ ^ splitmix64(index)));
}

RandomStream RandomStream::substream(std::string_view label) const {
    // High bit keeps label-derived streams disjoint from index-derived ones.
    std::uint64_t h = fnv1a64(label.data(), label.size()) | 0x8000000000000000ull;
    return substream(h);
}

std::uint64_t RandomStream::next_u64() { return gen_(); }

double RandomStream::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t RandomStream::uniform_below(std::uint64_t bound) {
    if (bound == 0) throw ParamError("uniform_below: bound must be positive");
    std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
        std::uint64_t r = next_u64();
        if (r >= threshold) return r % bound;
    }
}

double RandomStream::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    // u1 in (0, 1] so the log is finite.
    double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    double u2 = uniform();
    double radius = std::sqrt(-2.0 * std::log(u1));
    double angle = 2.0 * kPi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
}

cplx RandomStream::complex_normal(double variance) {
    double s = std::sqrt(variance * 0.5);
    double re = normal();
    double im = normal();
    return {s * re, s * im};
}

std::vector<int> RandomStream::permutation(int n) {
    std::vector<int> p(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) p[static_cast<std::size_t>(i)] = i;
    for (int i = n - 1; i > 0; --i) {
        auto j = static_cast<int>(uniform_below(static_cast<std::uint64_t>(i) + 1));
        std::swap(p[static_cast<std::size_t>(i)], p[static_cast<std::size_t>(j)]);
    }
    return p;
}

}  // namespace vqccs
