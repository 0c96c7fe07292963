#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "warnsim/roadnet/geometry.hpp"

namespace warnsim::roadnet {

struct Intersection {
  std::uint32_t id = 0;
  Point pos;
};

struct Segment {
  std::uint32_t id = 0;
  std::uint32_t a = 0;  // endpoint intersection ids
  std::uint32_t b = 0;
  double length = 0.0;       // meters
  double speed_limit = 0.0;  // m/s
};

struct NearestIntersection {
  std::uint32_t id = 0;
  double distance = 0.0;
};

/// Urban road network. Construction validates every structural invariant
/// (lengths, endpoint references, connectivity, unique coordinates) and
/// throws std::invalid_argument describing the first violation found.
class RoadGraph {
 public:
  RoadGraph(std::vector<Intersection> intersections, std::vector<Segment> segments,
            std::vector<Rect> obstacles = {});

  std::span<const Intersection> intersections() const { return intersections_; }
  std::span<const Segment> segments() const { return segments_; }
  std::span<const Rect> obstacles() const { return obstacles_; }

  const Intersection& intersection(std::uint32_t id) const;
  const Segment& segment(std::uint32_t id) const;
  /// Segment ids incident to an intersection, ascending.
  std::span<const std::uint32_t> incident(std::uint32_t intersection_id) const;
  std::uint32_t other_end(const Segment& s, std::uint32_t from) const {
    return s.a == from ? s.b : s.a;
  }

  /// Euclidean nearest intersection, ties to the lowest id.
  NearestIntersection nearest_intersection(Point p) const;
  /// Closed boundary: distance <= radius counts as at the intersection.
  bool is_at_intersection(Point p, double radius) const;

  /// True when the straight line a-b crosses any obstacle rectangle.
  bool blocked(Point a, Point b) const;
  /// Distance from p to the closest point of any segment.
  double distance_to_network(Point p) const;

  /// Shortest-path distances (meters) from every intersection to target,
  /// indexed by intersection position in intersections().
  std::vector<double> distances_to(std::uint32_t target) const;
  std::size_t index_of(std::uint32_t intersection_id) const;

  double min_x() const { return min_x_; }
  double min_y() const { return min_y_; }
  double max_x() const { return max_x_; }
  double max_y() const { return max_y_; }

 private:
  void build_index();

  std::vector<Intersection> intersections_;  // sorted by id
  std::vector<Segment> segments_;            // sorted by id
  std::vector<Rect> obstacles_;
  std::vector<std::vector<std::uint32_t>> incident_;  // by intersection index

  // Uniform bucket grid over intersections for nearest queries.
  double min_x_ = 0.0, min_y_ = 0.0, max_x_ = 0.0, max_y_ = 0.0;
  double cell_ = 1.0;
  int cols_ = 1, rows_ = 1;
  std::vector<std::vector<std::uint32_t>> buckets_;  // intersection indices
};

}  // namespace warnsim::roadnet
