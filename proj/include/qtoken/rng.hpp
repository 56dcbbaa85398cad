#pragma once

#include <cstdint>
#include <random>

namespace qtoken {

/// Generator used by every sampling operation. Always passed explicitly.
using Rng = std::mt19937_64;

/// SplitMix64 finalizer. Used to decorrelate seeds derived from small integers.
std::uint64_t splitmix64(std::uint64_t x);

/// Independent stream for one Monte Carlo trial, derived from (master seed, trial index).
Rng trial_rng(std::uint64_t master_seed, std::uint64_t trial_index);

/// Same derivation with an extra stream label, for experiments that need
/// several uncorrelated streams per trial.
Rng trial_rng(std::uint64_t master_seed, std::uint64_t trial_index, std::uint64_t stream);

/// Uniform double in [0, 1).
double uniform01(Rng& rng);

/// Uniform integer in [0, bound).
std::uint64_t uniform_below(Rng& rng, std::uint64_t bound);

}  // namespace qtoken
