#pragma once

#include <optional>
#include <span>
#include <vector>

#include "warnsim/roadnet/geometry.hpp"
#include "warnsim/routing/neighbor_table.hpp"

namespace warnsim::routing {

/// Greedy choice: the neighbor strictly closer to dest than `current`,
/// minimizing distance to dest (ties to the lowest id). nullopt at a local minimum.
std::optional<NodeId> gpsr_greedy_next(Point current, std::span<const NeighborEntry> neighbors,
                                       Point dest);

/// Perimeter-mode bookkeeping carried in the packet.
struct PerimeterState {
  bool active = false;
  Point entry_point;     // where greedy failed
  Point face_point;      // last face-change crossing of entry_point -> dest
  NodeId first_from = kNoNode;  // first edge of the current face
  NodeId first_to = kNoNode;
  NodeId prev_hop = kNoNode;
  Point prev_pos;
};

enum class PerimeterStatus { Forward, Drop };

struct PerimeterDecision {
  PerimeterStatus status = PerimeterStatus::Drop;
  NodeId next = kNoNode;
};

/// Gabriel-graph planarization of the local neighbor set: neighbor v stays
/// when no other neighbor lies strictly inside the circle with diameter (self, v).
std::vector<NeighborEntry> gabriel_neighbors(Point self, std::span<const NeighborEntry> neighbors);

/// Right-hand-rule step on the planarized neighbor graph. On entry the state
/// is initialised from `self_pos`; the caller leaves perimeter mode once a node
/// closer to dest than entry_point holds the packet (see perimeter_should_exit).
/// A face tour that returns to its first edge drops the packet.
PerimeterDecision gpsr_perimeter_next(NodeId self, Point self_pos,
                                      std::span<const NeighborEntry> neighbors, Point dest,
                                      PerimeterState& state);

inline bool perimeter_should_exit(const PerimeterState& state, Point self_pos, Point dest) {
  return state.active && distance(self_pos, dest) < distance(state.entry_point, dest);
}

}  // namespace warnsim::routing
