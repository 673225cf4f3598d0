#include "pilothop/rng.hpp"

namespace pilothop {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t stream_seed(std::uint64_t master_seed, std::uint64_t trial_index, Stream purpose) {
  const std::uint64_t trial_key = splitmix64(master_seed ^ splitmix64(trial_index));
  return splitmix64(trial_key ^ splitmix64(static_cast<std::uint64_t>(purpose)));
}

}  // namespace pilothop
