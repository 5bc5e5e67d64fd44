#pragma once

#include <cstdint>
#include <random>

namespace mdpgt {

using Rng = std::mt19937_64;

// What a derived stream is used for. Distinct purposes never share draws.
enum class StreamPurpose : std::uint64_t {
  env_reset = 1,
  action = 2,
  param_init = 3,
  output_pick = 4,
  probe = 5,
};

/// Coordinates of an independent random stream. Every random draw in a run
/// comes from a stream addressed by (seed, purpose, iteration, agent, index),
/// so the draws do not depend on the order in which streams are consumed.
struct StreamKey {
  std::uint64_t seed = 0;
  StreamPurpose purpose = StreamPurpose::action;
  std::uint64_t iteration = 0;
  std::uint64_t agent = 0;
  std::uint64_t index = 0;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

std::uint64_t derive_seed(const StreamKey& key) noexcept;

inline Rng make_stream(const StreamKey& key) { return Rng(derive_seed(key)); }

}  // namespace mdpgt
