#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <queue>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "warnsim/dissemination/games.hpp"
#include "warnsim/roadnet/geometry.hpp"
#include "warnsim/routing/gpsr.hpp"
#include "warnsim/routing/neighbor_table.hpp"

namespace testsupport {

using warnsim::NodeId;
using warnsim::Point;
using warnsim::routing::NeighborEntry;

inline std::vector<NeighborEntry> neighbors_of(std::size_t self, const std::vector<Point>& pts,
                                               double range) {
  std::vector<NeighborEntry> out;
  for (std::size_t j = 0; j < pts.size(); ++j) {
    if (j == self || warnsim::distance(pts[self], pts[j]) > range) continue;
    NeighborEntry e;
    e.id = static_cast<NodeId>(j);
    e.pos = pts[j];
    out.push_back(e);
  }
  return out;
}

/// Brute-force greedy choice: scan all neighbors, keep the strictly closer one
/// with the smallest distance to dest, lowest id on ties.
inline std::optional<NodeId> greedy_oracle(Point cur, const std::vector<NeighborEntry>& nbrs,
                                           Point dest) {
  const double own = warnsim::distance(cur, dest);
  std::optional<NodeId> best;
  double best_d = std::numeric_limits<double>::infinity();
  for (const auto& n : nbrs) {
    const double d = warnsim::distance(n.pos, dest);
    if (!(d < own)) continue;
    if (d < best_d || (d == best_d && n.id < *best)) {
      best = n.id;
      best_d = d;
    }
  }
  return best;
}

/// Breadth-first reachability over the unit-disk graph.
inline bool reachable(const std::vector<Point>& pts, double range, std::size_t src,
                      std::size_t dst) {
  std::vector<bool> seen(pts.size(), false);
  std::queue<std::size_t> q;
  q.push(src);
  seen[src] = true;
  while (!q.empty()) {
    const auto u = q.front();
    q.pop();
    if (u == dst) return true;
    for (std::size_t v = 0; v < pts.size(); ++v) {
      if (!seen[v] && warnsim::distance(pts[u], pts[v]) <= range) {
        seen[v] = true;
        q.push(v);
      }
    }
  }
  return false;
}

struct RouteOutcome {
  bool delivered = false;
  bool used_perimeter = false;
  std::size_t hops = 0;
  std::vector<std::size_t> path;
};

/// Hop-by-hop GPSR over a static topology. The destination is node `dst`;
/// a packet is delivered once a hop lands on it.
inline RouteOutcome route_static(const std::vector<Point>& pts, double range, std::size_t src,
                                 std::size_t dst, bool allow_perimeter, std::size_t max_hops) {
  using namespace warnsim::routing;
  RouteOutcome out;
  PerimeterState state;
  std::size_t cur = src;
  out.path.push_back(cur);
  const Point dest = pts[dst];
  while (out.hops < max_hops) {
    if (cur == dst) {
      out.delivered = true;
      return out;
    }
    const auto nbrs = neighbors_of(cur, pts, range);
    if (state.active && perimeter_should_exit(state, pts[cur], dest)) state = PerimeterState{};
    std::optional<NodeId> next;
    if (!state.active) next = gpsr_greedy_next(pts[cur], nbrs, dest);
    if (!next) {
      if (!allow_perimeter) return out;
      out.used_perimeter = true;
      const auto d = gpsr_perimeter_next(static_cast<NodeId>(cur), pts[cur], nbrs, dest, state);
      if (d.status == PerimeterStatus::Drop) return out;
      next = d.next;
    }
    cur = *next;
    out.path.push_back(cur);
    ++out.hops;
  }
  return out;
}

/// Seven nodes around a void: source S(0), destination D(6). Every neighbor of
/// S is farther from D than S, so greedy stalls immediately; the only path
/// runs up and over the gap.
inline std::vector<Point> void_fixture() {
  return {
      {0.0, 0.0},      // 0 S
      {0.0, 90.0},     // 1
      {80.0, 150.0},   // 2
      {170.0, 150.0},  // 3
      {250.0, 90.0},   // 4
      {-80.0, 0.0},    // 5 behind S
      {250.0, 0.0},    // 6 D
  };
}
inline constexpr double kVoidRange = 110.0;

/// Payoff of player i under profile p (forward with probability p_i).
inline double fg_payoff(std::span<const double> a, std::span<const double> p, std::size_t i,
                        double benefit, double cost) {
  double none_other = 1.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (j != i) none_other *= 1.0 - p[j];
  }
  const double q = 1.0 - none_other;
  return p[i] * (benefit * a[i] - cost) + (1.0 - p[i]) * benefit * a[i] * q;
}

/// Largest payoff gain any single player obtains by deviating to a point of
/// a uniform grid over [0,1] with the given step.
inline double max_deviation_gain(std::span<const double> a, std::span<const double> p,
                                 double benefit, double cost, double step) {
  double worst = 0.0;
  std::vector<double> trial(p.begin(), p.end());
  const int n = static_cast<int>(std::lround(1.0 / step));
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double base = fg_payoff(a, p, i, benefit, cost);
    for (int k = 0; k <= n; ++k) {
      trial[i] = k * step;
      worst = std::max(worst, fg_payoff(a, trial, i, benefit, cost) - base);
    }
    trial[i] = p[i];
  }
  return worst;
}

/// Availability fixtures for 1..3 players: edge cases plus a deterministic
/// random sweep.
inline std::vector<std::vector<double>> fg_fixtures(std::size_t random_per_size) {
  std::vector<std::vector<double>> out{
      {1.0},       {0.3},           {0.5},      {0.75},          {1.0, 1.0},
      {0.4, 0.4},  {1.0, 0.6},      {0.9, 0.2}, {0.51, 0.51},    {1.0, 1.0, 1.0},
      {0.2, 0.3, 0.1}, {1.0, 0.8, 0.6}, {0.9, 0.9, 0.55}, {1.0, 0.55, 0.55}, {0.7, 0.4, 0.95},
  };
  std::mt19937_64 rng(20240607);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t n = 1; n <= 3; ++n) {
    for (std::size_t k = 0; k < random_per_size; ++k) {
      std::vector<double> a(n);
      for (auto& x : a) x = u(rng);
      out.push_back(std::move(a));
    }
  }
  return out;
}

}  // namespace testsupport
