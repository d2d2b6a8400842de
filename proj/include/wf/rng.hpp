#pragma once

#include <cstdint>
#include <stdexcept>

namespace wf {

// Deterministic 64-bit stream (splitmix64). Same seed, same stream, on every
// platform; std::uniform_int_distribution is implementation-defined so we
// roll the draws ourselves.
class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform integer in [a, b], both ends inclusive.
    int randi(int a, int b) {
        if (a > b) throw std::invalid_argument("randi: empty range");
        std::uint64_t span = static_cast<std::uint64_t>(b) - static_cast<std::uint64_t>(a) + 1;
        return a + static_cast<int>(next() % span);
    }

    // Uniform real in [0, 1).
    double randr() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Stable per-item stream derivation: mix the global seed with an index so
    // dataset-level runs reproduce regardless of worker scheduling.
    static std::uint64_t derive(std::uint64_t seed, std::uint64_t index) {
        std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t state_;
};

}  // namespace wf
