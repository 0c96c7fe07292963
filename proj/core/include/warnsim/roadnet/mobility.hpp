#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "warnsim/roadnet/geometry.hpp"
#include "warnsim/roadnet/road_graph.hpp"

namespace warnsim::roadnet {

enum class NodeKind : std::uint8_t { Vehicle, Pedestrian, Rsu };

std::string to_string(NodeKind kind);

struct TraceRecord {
  double time = 0.0;  // s
  NodeId node = 0;
  Point pos;          // m
  double speed = 0.0;  // m/s
};

struct Kinematics {
  Point pos;
  double speed = 0.0;
  Point heading;  // unit vector, zero when stationary
};

/// Per-node piecewise-linear trajectories. Node ids are dense: 0..node_count()-1.
class MobilityTrace {
 public:
  MobilityTrace() = default;
  explicit MobilityTrace(std::vector<TraceRecord> records);

  /// Appends a record; times must strictly increase per node.
  void add(const TraceRecord& r);

  std::size_t node_count() const { return tracks_.size(); }
  std::span<const TraceRecord> track(NodeId node) const;
  double start_time(NodeId node) const;
  double end_time(NodeId node) const;

  /// Linear interpolation of position and speed. Throws std::out_of_range
  /// naming the node and its span when t lies outside it.
  Kinematics position_at(NodeId node, double t) const;

  /// Ordered records (time, node) for serialization.
  std::vector<TraceRecord> records() const;

 private:
  std::vector<std::vector<TraceRecord>> tracks_;
};

/// Sequential playback helper: amortized O(1) lookups for monotone times.
class TraceCursor {
 public:
  TraceCursor(const MobilityTrace& trace, NodeId node);
  Kinematics at(double t);

 private:
  std::span<const TraceRecord> track_;
  std::size_t idx_ = 0;
};

/// CSV with header `time,node_id,x,y,speed`, LF line endings.
MobilityTrace read_trace_csv(std::istream& in);
void write_trace_csv(std::ostream& out, const MobilityTrace& trace);

struct GridSpec {
  double area_width = 0.0;   // m
  double area_height = 0.0;  // m
  double block_size = 0.0;   // m
  double density = 0.0;      // vehicles per km^2
  std::uint64_t seed = 1;
  double duration = 60.0;        // trace span, s
  double speed_limit = 13.89;    // m/s on every segment
  double min_speed_fraction = 0.5;
  bool obstacles = false;        // buildings inset from streets
  double obstacle_inset = 5.0;   // m
};

struct GridScenario {
  RoadGraph graph;
  MobilityTrace trace;
  std::vector<NodeKind> kinds;  // by node id
};

/// Manhattan grid with round(density * area_km2) vehicles driving shortest
/// path trips between random intersections, choosing randomly among
/// equally short continuations at each junction.
GridScenario generate_grid(const GridSpec& spec);

/// Manhattan grid graph only.
RoadGraph make_grid_graph(double width, double height, double block_size, double speed_limit,
                          bool obstacles, double obstacle_inset);

/// Random-waypoint walkers on the graph at constant speed (pedestrians, 1.4 m/s nominal).
/// Appended to trace starting at node id trace.node_count().
void append_waypoint_walkers(const RoadGraph& graph, MobilityTrace& trace,
                             std::vector<NodeKind>& kinds, std::size_t count, double speed,
                             double duration, NodeKind kind, std::uint64_t seed);

/// Vehicle trips as in generate_grid, appended to an existing trace.
void append_vehicle_trips(const RoadGraph& graph, MobilityTrace& trace,
                          std::vector<NodeKind>& kinds, std::size_t count, double duration,
                          double min_speed_fraction, std::uint64_t seed);

/// Road graph file (JSON): {"intersections":[{id,x,y}], "segments":[{id,a,b,length,speed_limit}],
/// "obstacles":[{min_x,min_y,max_x,max_y}]}.
RoadGraph read_graph_json(std::istream& in);
void write_graph_json(std::ostream& out, const RoadGraph& graph);

}  // namespace warnsim::roadnet
