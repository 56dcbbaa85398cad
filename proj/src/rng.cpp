#include "qtoken/rng.hpp"

namespace qtoken {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

Rng trial_rng(std::uint64_t master_seed, std::uint64_t trial_index) {
    return trial_rng(master_seed, trial_index, 0);
}

Rng trial_rng(std::uint64_t master_seed, std::uint64_t trial_index, std::uint64_t stream) {
    std::uint64_t s = splitmix64(master_seed);
    s = splitmix64(s ^ trial_index);
    s = splitmix64(s ^ (stream * 0xd1b54a32d192ed03ULL));
    std::seed_seq seq{static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(s >> 32),
                      static_cast<std::uint32_t>(trial_index), static_cast<std::uint32_t>(stream)};
    return Rng(seq);
}

double uniform01(Rng& rng) {
    // 53 random mantissa bits; independent of libstdc++'s generate_canonical.
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::uint64_t uniform_below(Rng& rng, std::uint64_t bound) {
    // Rejection sampling; exactly uniform.
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % bound;
}

}  // namespace qtoken
