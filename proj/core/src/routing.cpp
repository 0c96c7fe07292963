#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "warnsim/routing/gpsr.hpp"
#include "warnsim/routing/multimetric.hpp"
#include "warnsim/routing/neighbor_table.hpp"

namespace warnsim::routing {

// --- neighbor table --------------------------------------------------------

bool NeighborTable::upsert(const NeighborEntry& e, double now, double timeout) {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), e.id,
                             [](const NeighborEntry& a, NodeId id) { return a.id < id; });
  if (it != entries_.end() && it->id == e.id) {
    const bool was_stale = now - it->last_heard > timeout;
    *it = e;
    return was_stale;
  }
  entries_.insert(it, e);
  return true;
}

void NeighborTable::expire(double now, double timeout) {
  std::erase_if(entries_, [&](const NeighborEntry& e) { return now - e.last_heard > timeout; });
}

void NeighborTable::erase(NodeId id) {
  std::erase_if(entries_, [&](const NeighborEntry& e) { return e.id == id; });
}

const NeighborEntry* NeighborTable::find(NodeId id) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), id,
                             [](const NeighborEntry& a, NodeId v) { return a.id < v; });
  return (it != entries_.end() && it->id == id) ? &*it : nullptr;
}

std::vector<NeighborEntry> NeighborTable::fresh(double now, double timeout) const {
  std::vector<NeighborEntry> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) {
    if (now - e.last_heard <= timeout) out.push_back(e);
  }
  return out;
}

std::size_t NeighborTable::fresh_count(double now, double timeout) const {
  return static_cast<std::size_t>(std::count_if(entries_.begin(), entries_.end(), [&](const auto& e) {
    return now - e.last_heard <= timeout;
  }));
}

// --- GPSR ------------------------------------------------------------------

std::optional<NodeId> gpsr_greedy_next(Point current, std::span<const NeighborEntry> neighbors,
                                       Point dest) {
  double best = distance(current, dest);
  std::optional<NodeId> pick;
  for (const auto& n : neighbors) {
    const double d = distance(n.pos, dest);
    if (d < best || (pick && d == best && n.id < *pick)) {
      best = d;
      pick = n.id;
    }
  }
  return pick;
}

std::vector<NeighborEntry> gabriel_neighbors(Point self, std::span<const NeighborEntry> neighbors) {
  std::vector<NeighborEntry> out;
  for (const auto& v : neighbors) {
    const Point mid = lerp(self, v.pos, 0.5);
    const double r2 = distance_sq(self, v.pos) / 4.0;
    bool keep = true;
    for (const auto& w : neighbors) {
      if (w.id == v.id) continue;
      if (distance_sq(w.pos, mid) < r2) {
        keep = false;
        break;
      }
    }
    if (keep) out.push_back(v);
  }
  return out;
}

namespace {

double bearing(Point from, Point to) { return std::atan2(to.y - from.y, to.x - from.x); }

// Counterclockwise sweep from `ref`, in (0, 2pi].
double ccw_delta(double ref, double angle) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double d = std::fmod(angle - ref, two_pi);
  if (d < 0.0) d += two_pi;
  if (d <= 1e-12) d += two_pi;
  return d;
}

const NeighborEntry* first_ccw(Point self, std::span<const NeighborEntry> planar, double ref) {
  const NeighborEntry* best = nullptr;
  double best_delta = 0.0;
  for (const auto& n : planar) {
    const double d = ccw_delta(ref, bearing(self, n.pos));
    if (best == nullptr || d < best_delta || (d == best_delta && n.id < best->id)) {
      best = &n;
      best_delta = d;
    }
  }
  return best;
}

}  // namespace

PerimeterDecision gpsr_perimeter_next(NodeId self, Point self_pos,
                                      std::span<const NeighborEntry> neighbors, Point dest,
                                      PerimeterState& state) {
  const std::vector<NeighborEntry> planar = gabriel_neighbors(self_pos, neighbors);
  if (planar.empty()) return {PerimeterStatus::Drop, kNoNode};

  double ref = 0.0;
  if (!state.active) {
    state = PerimeterState{};
    state.active = true;
    state.entry_point = self_pos;
    state.face_point = self_pos;
    ref = bearing(self_pos, dest);
  } else {
    ref = bearing(self_pos, state.prev_pos);
  }

  const NeighborEntry* next = first_ccw(self_pos, planar, ref);
  // Face change: an edge crossing entry_point->dest closer to dest than the
  // last crossing moves the tour onto the adjacent face.
  for (std::size_t guard = 0; guard < planar.size(); ++guard) {
    Point cross_pt;
    if (!segment_intersection(self_pos, next->pos, state.entry_point, dest, cross_pt)) break;
    if (!(distance(cross_pt, dest) < distance(state.face_point, dest) - 1e-9)) break;
    state.face_point = cross_pt;
    state.first_from = kNoNode;
    state.first_to = kNoNode;
    next = first_ccw(self_pos, planar, bearing(self_pos, next->pos));
  }

  if (state.first_from == self && state.first_to == next->id) {
    return {PerimeterStatus::Drop, kNoNode};
  }
  if (state.first_from == kNoNode) {
    state.first_from = self;
    state.first_to = next->id;
  }
  state.prev_hop = self;
  state.prev_pos = self_pos;
  return {PerimeterStatus::Forward, next->id};
}

// --- multimetric -----------------------------------------------------------

bool MetricWeights::valid(double floor) const {
  const auto a = as_array();
  double sum = 0.0;
  for (double w : a) {
    if (!(w >= floor - 1e-12) || w > 1.0 + 1e-12) return false;
    sum += w;
  }
  return std::abs(sum - 1.0) <= 1e-9;
}

MetricVector normalize_metrics(const NeighborEntry& entry, Point current, Point dest,
                               const MetricConfig& cfg) {
  MetricVector v;
  const double d_ref = distance(current, dest);
  const double d_nb = distance(entry.pos, dest);
  if (d_ref > 0.0) {
    v.m_dist = std::clamp(1.0 - d_nb / d_ref, 0.0, 1.0);
  } else {
    v.m_dist = d_nb == 0.0 ? 1.0 : 0.0;
  }
  if (d_nb == 0.0) v.m_dist = 1.0;
  v.m_density = cfg.density_ref > 0.0
                    ? std::clamp(entry.advertised_density / cfg.density_ref, 0.0, 1.0)
                    : 0.0;
  const Point future = entry.pos + entry.heading * (entry.speed * cfg.horizon);
  v.m_traj = distance(future, dest) < d_nb ? 1.0 : 0.0;
  v.m_abe = cfg.bitrate > 0.0 ? std::clamp(entry.advertised_abe / cfg.bitrate, 0.0, 1.0) : 0.0;
  v.m_mac = std::clamp(1.0 - entry.advertised_mac_loss, 0.0, 1.0);
  return v;
}

double multimetric_score(const MetricVector& v, const MetricWeights& w) {
  return w.w_dist * v.m_dist + w.w_density * v.m_density + w.w_traj * v.m_traj +
         w.w_abe * v.m_abe + w.w_mac * v.m_mac;
}

std::optional<ScoredCandidate> select_forwarder(std::span<const NeighborEntry> candidates,
                                                Point current, Point dest, const MetricWeights& w,
                                                const MetricConfig& cfg) {
  std::optional<ScoredCandidate> best;
  for (const auto& c : candidates) {
    const double s = multimetric_score(normalize_metrics(c, current, dest, cfg), w);
    if (!best || s > best->score || (s == best->score && c.id < best->id)) best = {c.id, s};
  }
  return best;
}

std::array<double, kMetricCount> floor_and_normalize(std::array<double, kMetricCount> w,
                                                     double floor) {
  if (!(floor >= 0.0) || floor * kMetricCount > 1.0) {
    throw std::invalid_argument("w_floor must lie in [0, 1/5]");
  }
  std::array<bool, kMetricCount> pinned{};
  for (std::size_t round = 0; round <= kMetricCount; ++round) {
    double free_mass = 1.0;
    double free_sum = 0.0;
    std::size_t free_count = 0;
    for (std::size_t k = 0; k < kMetricCount; ++k) {
      if (pinned[k]) {
        free_mass -= floor;
      } else {
        free_sum += std::max(w[k], 0.0);
        ++free_count;
      }
    }
    bool changed = false;
    for (std::size_t k = 0; k < kMetricCount; ++k) {
      if (pinned[k]) {
        w[k] = floor;
        continue;
      }
      w[k] = free_sum > 0.0 ? std::max(w[k], 0.0) / free_sum * free_mass
                            : free_mass / static_cast<double>(free_count);
    }
    for (std::size_t k = 0; k < kMetricCount; ++k) {
      if (!pinned[k] && w[k] < floor) {
        pinned[k] = true;
        changed = true;
      }
    }
    if (!changed) break;
  }
  return w;
}

MetricWeights dsw_update(std::span<const MetricVector> snapshots, const MetricWeights& prev,
                         double lambda, double w_floor) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw std::invalid_argument("lambda must lie in [0, 1]");
  if (snapshots.size() < 2) return MetricWeights::equal();

  std::array<double, kMetricCount> raw{};
  for (std::size_t k = 0; k < kMetricCount; ++k) {
    double mean = 0.0;
    for (const auto& s : snapshots) mean += s.as_array()[k];
    mean /= static_cast<double>(snapshots.size());
    if (mean <= 0.0) continue;
    double var = 0.0;
    for (const auto& s : snapshots) {
      const double d = s.as_array()[k] - mean;
      var += d * d;
    }
    var /= static_cast<double>(snapshots.size());
    raw[k] = std::sqrt(var) / mean;
  }
  const double total = std::accumulate(raw.begin(), raw.end(), 0.0);
  std::array<double, kMetricCount> candidate{};
  for (std::size_t k = 0; k < kMetricCount; ++k) {
    candidate[k] = total > 0.0 ? raw[k] / total : 1.0 / static_cast<double>(kMetricCount);
  }
  const auto p = prev.as_array();
  std::array<double, kMetricCount> mixed{};
  for (std::size_t k = 0; k < kMetricCount; ++k) {
    mixed[k] = lambda * candidate[k] + (1.0 - lambda) * p[k];
  }
  return MetricWeights::from_array(floor_and_normalize(mixed, w_floor));
}

}  // namespace warnsim::routing
