#include "tslam/util/rng.hpp"

namespace ts {

std::uint64_t derive_seed(std::uint64_t master, std::string_view label) {
  std::uint64_t state = master;
  splitmix64(state);
  for (unsigned char c : label) {
    state ^= static_cast<std::uint64_t>(c);
    splitmix64(state);
  }
  std::uint64_t copy = state;
  return splitmix64(copy);
}

}  // namespace ts
