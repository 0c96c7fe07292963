#pragma once

#include <array>
#include <optional>
#include <span>

#include "warnsim/roadnet/geometry.hpp"
#include "warnsim/routing/neighbor_table.hpp"

namespace warnsim::routing {

inline constexpr std::size_t kMetricCount = 5;

/// Candidate scores in [0,1], higher is better. Order: distance, density,
/// trajectory, available bandwidth, MAC losses.
struct MetricVector {
  double m_dist = 0.0;
  double m_density = 0.0;
  double m_traj = 0.0;
  double m_abe = 0.0;
  double m_mac = 0.0;

  std::array<double, kMetricCount> as_array() const {
    return {m_dist, m_density, m_traj, m_abe, m_mac};
  }
};

struct MetricWeights {
  double w_dist = 0.2;
  double w_density = 0.2;
  double w_traj = 0.2;
  double w_abe = 0.2;
  double w_mac = 0.2;

  static MetricWeights equal() { return {}; }
  static MetricWeights from_array(const std::array<double, kMetricCount>& a) {
    return {a[0], a[1], a[2], a[3], a[4]};
  }
  std::array<double, kMetricCount> as_array() const {
    return {w_dist, w_density, w_traj, w_abe, w_mac};
  }
  /// Sum to 1 within 1e-9 and every weight >= floor (minus 1e-12).
  bool valid(double floor) const;
};

struct MetricConfig {
  double bitrate = 6e6;        // normalizes advertised ABE
  double density_ref = 100.0;  // nodes/km^2 mapped to 1
  double horizon = 1.0;        // s, trajectory look-ahead
};

MetricVector normalize_metrics(const NeighborEntry& entry, Point current, Point dest,
                               const MetricConfig& cfg);

double multimetric_score(const MetricVector& v, const MetricWeights& w);

struct ScoredCandidate {
  NodeId id = kNoNode;
  double score = 0.0;
};

/// Argmax of the score over candidates, ties to the lowest id.
std::optional<ScoredCandidate> select_forwarder(std::span<const NeighborEntry> candidates,
                                                Point current, Point dest, const MetricWeights& w,
                                                const MetricConfig& cfg);

/// Dynamic self-configured weights. Metrics that vary more across the current
/// neighbors (higher coefficient of variation) gain weight; the result is
/// smoothed with the previous weights, floored at w_floor and renormalized.
/// Fewer than two neighbors yields equal weights.
MetricWeights dsw_update(std::span<const MetricVector> snapshots, const MetricWeights& prev,
                         double lambda, double w_floor);

/// Projects arbitrary non-negative weights onto {sum = 1, each >= floor}.
std::array<double, kMetricCount> floor_and_normalize(std::array<double, kMetricCount> w,
                                                     double floor);

}  // namespace warnsim::routing
