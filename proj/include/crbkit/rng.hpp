#pragma once

#include <cstdint>
#include <limits>

namespace crbkit {

// Independent random substreams used for Monte Carlo draws.
enum class StreamDomain : std::uint64_t {
  noise = 1,
  additive = 2,
  sequence = 3,
  trial = 4,
  grid = 5,
};

/// Counter-based generator: the stream for (seed, domain, index) depends on
/// nothing else, so draw i is identical no matter which thread produces it.
/// Satisfies UniformRandomBitGenerator so it plugs into <random> distributions.
class Substream {
 public:
  using result_type = std::uint64_t;

  Substream(std::uint64_t seed, StreamDomain domain, std::uint64_t index);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();

 private:
  std::uint64_t state_;
};

std::uint64_t mix64(std::uint64_t x);

}  // namespace crbkit
