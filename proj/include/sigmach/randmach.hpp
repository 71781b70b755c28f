#pragma once

#include <cstdint>

#include "sigmach/engine.hpp"
#include "sigmach/machine.hpp"

namespace sigmach {

// splitmix64; self-contained so generated machines are identical across
// platforms and standard-library versions
struct RandomStream {
    std::uint64_t state;
    explicit RandomStream(std::uint64_t seed) : state(seed) {}
    std::uint64_t next() {
        state += 0x9e3779b97f4a7c15ull;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    std::uint64_t below(std::uint64_t n) { return next() % n; }
    long range(long lo, long hi) { return lo + static_cast<long>(below(static_cast<std::uint64_t>(hi - lo + 1))); }
};

// One random machine: 2..5 meta-signals with speeds from {-2..2}, up to 4
// rules over distinct-speed inputs, at least one two-outcome rule, an accept
// meta-signal, and up to 6 initial signals in [-10, 10]. Fully determined by
// the seed.
Machine random_machine(std::uint64_t seed);

// The index-th machine of the seeded harness stream that is k-RNSM-conformant
// at this k: it validates, declares accept, and no enumerated path shows two
// same-time collisions.
Machine random_krnsm(std::uint64_t seed, int index, int k, const Budget& budget);

}  // namespace sigmach
