#pragma once

#include <span>
#include <vector>

#include "warnsim/roadnet/geometry.hpp"

namespace warnsim::routing {

/// What a node learned about a neighbor from its last hello.
struct NeighborEntry {
  NodeId id = kNoNode;
  Point pos;
  double speed = 0.0;
  Point heading;
  double advertised_density = 0.0;   // nodes per km^2
  double advertised_abe = 0.0;       // bit/s
  double advertised_mac_loss = 0.0;  // [0,1]
  double last_heard = 0.0;           // s
};

/// Neighbor list ordered by id.
class NeighborTable {
 public:
  /// Inserts or refreshes an entry; returns true when the neighbor was not
  /// present (or had expired) before this hello.
  bool upsert(const NeighborEntry& e, double now, double timeout);
  /// Drops entries with now - last_heard > timeout.
  void expire(double now, double timeout);
  void erase(NodeId id);

  const NeighborEntry* find(NodeId id) const;
  /// Entries still fresh at `now`.
  std::vector<NeighborEntry> fresh(double now, double timeout) const;
  std::size_t fresh_count(double now, double timeout) const;
  std::span<const NeighborEntry> all() const { return entries_; }

 private:
  std::vector<NeighborEntry> entries_;
};

}  // namespace warnsim::routing
