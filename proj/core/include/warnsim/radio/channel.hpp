#pragma once

#include <cstdint>
#include <deque>
#include <span>
#include <unordered_map>
#include <vector>

#include "warnsim/radio/radio.hpp"
#include "warnsim/sim/rng.hpp"

namespace warnsim::radio {

/// Uniform bucket grid over node positions for range queries.
class PositionIndex {
 public:
  explicit PositionIndex(double cell) : cell_(cell) {}

  void rebuild(std::span<const Point> positions, std::span<const std::uint8_t> active);

  /// Calls f(id) for every indexed node whose bucket may lie within r of p.
  /// Callers still apply an exact distance test.
  template <class F>
  void for_each_candidate(Point p, double r, F&& f) const {
    if (buckets_.empty()) return;
    const int x0 = col(p.x - r), x1 = col(p.x + r);
    const int y0 = row(p.y - r), y1 = row(p.y + r);
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        for (NodeId id : buckets_[static_cast<std::size_t>(y) * cols_ + x]) f(id);
      }
    }
  }

 private:
  int col(double x) const;
  int row(double y) const;

  double cell_;
  double min_x_ = 0.0, min_y_ = 0.0;
  int cols_ = 0, rows_ = 0;
  std::vector<std::vector<NodeId>> buckets_;
};

enum class RxOutcome : std::uint8_t { Delivered, Collision, LinkLoss };

struct Reception {
  NodeId receiver = kNoNode;
  double delivery_time = 0.0;
  RxOutcome outcome = RxOutcome::Delivered;
};

/// Channel-level bookkeeping. Every (transmission, in-range receiver) pair is
/// receivable and ends as exactly one of delivered, collision or link loss.
struct ChannelCounters {
  std::uint64_t transmissions = 0;
  std::uint64_t receivable = 0;
  std::uint64_t delivered = 0;
  std::uint64_t lost_collision = 0;
  std::uint64_t lost_link = 0;
  std::uint64_t collision_events = 0;

  bool conserved() const { return delivered + lost_collision + lost_link == receivable; }
};

using TxId = std::uint64_t;

/// Shared broadcast medium with unit-disk range, optional obstacle blocking,
/// overlap collisions and independent per-link loss.
///
/// A receiver whose reception window overlaps another transmission it can
/// hear loses both frames; a node that transmits while receiving loses the
/// frame it was receiving. Survivors then pass an independent loss draw.
class Channel {
 public:
  Channel(RadioConfig cfg, const roadnet::RoadGraph* graph, std::size_t node_count,
          std::uint64_t seed);

  const RadioConfig& config() const { return cfg_; }
  std::size_t node_count() const { return positions_.size(); }

  /// Positions used for range tests until the next update; inactive nodes
  /// neither transmit nor receive.
  void set_positions(std::span<const Point> positions, std::span<const std::uint8_t> active);
  Point position(NodeId n) const { return positions_[n]; }
  bool active(NodeId n) const { return active_[n] != 0; }

  /// Nodes currently within range of `node` (excluding itself), ascending id.
  std::vector<NodeId> in_range_of(NodeId node) const;

  TxId begin(NodeId sender, double t, std::uint32_t bytes);
  /// Resolves a transmission at its end time; receptions are ordered by receiver id.
  std::vector<Reception> end(TxId tx);
  double end_time(TxId tx) const;
  NodeId sender_of(TxId tx) const;

  /// Carrier sense: busy when a heard transmission started at least one slot ago.
  bool sensing_busy(NodeId node, double t) const;
  /// Earliest time at which every transmission currently heard by node has ended.
  double idle_at(NodeId node, double t) const;
  bool transmitting(NodeId node) const { return tx_of_[node] != 0; }

  /// Fraction of the last `window` seconds during which node heard the medium busy.
  double busy_ratio(NodeId node, double now, double window = 1.0);
  /// Fraction of receptions lost to collisions over the last `window` seconds.
  double collision_fraction(NodeId node, double now, double window = 5.0);
  /// Fraction of receptions lost to collision or link loss over the last `window` seconds.
  double loss_fraction(NodeId node, double now, double window = 5.0);

  const ChannelCounters& counters() const { return counters_; }

 private:
  struct RxSlot {
    NodeId receiver;
    bool corrupted;
    bool collided;  // corrupted by overlap or half-duplex
  };
  struct Tx {
    NodeId sender;
    double start;
    double end;
    std::vector<RxSlot> rx;
  };
  struct Interval {
    double start;
    double end;
  };
  struct RxMark {
    double time;
    bool collided;
    bool lost;
  };

  bool reachable(NodeId a, NodeId b) const;
  void mark_busy(NodeId node, double start, double end);
  void corrupt(TxId tx, NodeId receiver);

  RadioConfig cfg_;
  const roadnet::RoadGraph* graph_;
  sim::RngStream loss_rng_;
  std::vector<Point> positions_;
  std::vector<std::uint8_t> active_;
  PositionIndex index_;

  std::unordered_map<TxId, Tx> txs_;
  TxId next_tx_ = 1;
  std::vector<TxId> tx_of_;                  // ongoing own transmission, 0 = none
  std::vector<std::vector<TxId>> hearing_;   // ongoing heard transmissions per node
  std::vector<std::deque<Interval>> busy_;   // merged heard intervals per node
  std::vector<std::deque<RxMark>> marks_;    // recent reception outcomes per node
  ChannelCounters counters_;
};

}  // namespace warnsim::radio
