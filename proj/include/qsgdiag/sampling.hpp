#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <random>

namespace qsgdiag {

/// Independent random streams used by the simulator. Each (master seed,
/// domain, index) triple names one stream, so per-run and per-multipole
/// draws do not depend on execution order.
enum class StreamDomain : std::uint64_t {
  MeasurementRun = 1,
  ReadoutNoise = 2,
  Tomography = 3,
  MaxwellPoints = 4,
  SpinHalfRun = 5,
};

constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t substream_seed(std::uint64_t master, StreamDomain domain,
                                       std::uint64_t index) {
  return mix64(mix64(master ^ mix64(static_cast<std::uint64_t>(domain))) + index);
}

/// SplitMix64 counter stream; satisfies UniformRandomBitGenerator.
class StreamRng {
public:
  using result_type = std::uint64_t;

  explicit StreamRng(std::uint64_t seed) : state_(seed) {}
  StreamRng(std::uint64_t master, StreamDomain domain, std::uint64_t index)
      : state_(substream_seed(master, domain, index)) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix64(state_);
  }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  double normal() { return normal_(*this); }

private:
  std::uint64_t state_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Runs body(i) for i in [0, count) on up to `threads` workers. Each index is
/// visited exactly once; callers write results by index.
void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)> &body);

} // namespace qsgdiag
