#pragma once

#include <cstdint>
#include <random>

namespace pilothop {

using Rng = std::mt19937_64;

/// Independent sub-streams of one trial. Each purpose gets its own generator
/// so that, e.g., adding a detection method never shifts the channel draws.
enum class Stream : std::uint64_t {
  kCode = 1,
  kEvents = 2,
  kActivity = 3,
  kChannels = 4,
  kNoise = 5,
  kKMeans = 6,
};

std::uint64_t splitmix64(std::uint64_t x);

/// seed = splitmix64(splitmix64(master ^ splitmix64(trial)) ^ splitmix64(purpose)).
/// Trial-invariant draws (the pilot-hopping code) use trial index 0 with
/// Stream::kCode, which no per-trial purpose shares.
std::uint64_t stream_seed(std::uint64_t master_seed, std::uint64_t trial_index, Stream purpose);

inline Rng make_rng(std::uint64_t master_seed, std::uint64_t trial_index, Stream purpose) {
  return Rng(stream_seed(master_seed, trial_index, purpose));
}

}  // namespace pilothop
