#pragma once

#include <cstdint>

#include "warnsim/roadnet/geometry.hpp"
#include "warnsim/roadnet/road_graph.hpp"

namespace warnsim::radio {

struct RadioConfig {
  double r_max = 300.0;          // m
  double bitrate = 6e6;          // bit/s
  double per_link_loss = 0.05;   // independent loss after collisions
  bool obstacle_blocking = false;
  double slot = 13e-6;           // s; backoff slot and carrier-sense latency

  /// Throws std::invalid_argument on r_max <= 0, bitrate <= 0 or loss outside [0,1].
  void validate() const;
};

/// Signal, channel and collision indicators, each in [0,1].
struct LinkQualityInputs {
  double signal = 1.0;
  double channel = 1.0;
  double collision_prob = 0.0;
};

bool in_range(Point a, Point b, const RadioConfig& cfg, const roadnet::RoadGraph* graph);

/// Seconds on air for a frame of `bytes`.
inline double airtime(std::uint32_t bytes, const RadioConfig& cfg) {
  return static_cast<double>(bytes) * 8.0 / cfg.bitrate;
}

/// Equal-weight link-quality factor: (signal + channel + (1 - collision)) / 3.
double lqf(const LinkQualityInputs& in);

/// Available bandwidth from the idle fraction of the channel.
double abe_estimate(double busy_ratio, double bitrate);

/// Adaptive beacon interval: i_min + (i_max - i_min) * busy^2.
double atb_interval(double busy_ratio, double i_min, double i_max);

}  // namespace warnsim::radio
