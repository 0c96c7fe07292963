#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace warnsim::sim {

/// Purpose label of a random substream. Each purpose draws from its own
/// engine so that changing one protocol's draws never perturbs mobility.
enum class StreamId : std::uint32_t {
  Mobility = 1,
  RadioLoss = 2,
  GameDraw = 3,
  Assessment = 4,
  Mac = 5,
  Traffic = 6,
};

std::string_view to_string(StreamId id);

class RngStream {
 public:
  RngStream(std::uint64_t seed, StreamId stream);

  std::uint64_t seed() const { return seed_; }
  StreamId stream() const { return stream_; }

  std::uint64_t next() { return engine_(); }
  /// Uniform in [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  bool bernoulli(double p) { return uniform() < p; }
  /// Uniform index in [0, n); n must be positive.
  std::size_t index(std::size_t n);

 private:
  std::uint64_t seed_;
  StreamId stream_;
  std::mt19937_64 engine_;
};

}  // namespace warnsim::sim
