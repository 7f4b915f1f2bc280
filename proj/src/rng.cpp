#include "crbkit/rng.hpp"

namespace crbkit {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t mix64(std::uint64_t x) {
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

Substream::Substream(std::uint64_t seed, StreamDomain domain, std::uint64_t index) {
  const auto d = static_cast<std::uint64_t>(domain);
  state_ = mix64(mix64(seed + kGolden) ^ mix64(d * kGolden + 0x632BE59BD9B4E019ULL) ^
                 mix64(index ^ 0xD1B54A32D192ED03ULL));
}

Substream::result_type Substream::operator()() {
  state_ += kGolden;
  return mix64(state_);
}

double Substream::uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

}  // namespace crbkit
