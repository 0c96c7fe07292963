#pragma once

#include <cmath>
#include <cstdint>

namespace warnsim {

using NodeId = std::uint32_t;
inline constexpr NodeId kNoNode = 0xffffffffu;

struct Point {
  double x = 0.0;
  double y = 0.0;

  Point operator+(Point o) const { return {x + o.x, y + o.y}; }
  Point operator-(Point o) const { return {x - o.x, y - o.y}; }
  Point operator*(double s) const { return {x * s, y * s}; }
  bool operator==(const Point&) const = default;
};

inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point a) { return std::hypot(a.x, a.y); }
inline double distance(Point a, Point b) { return norm(a - b); }
inline double distance_sq(Point a, Point b) {
  const Point d = a - b;
  return d.x * d.x + d.y * d.y;
}
inline Point lerp(Point a, Point b, double f) { return a + (b - a) * f; }

/// Axis-aligned rectangle, used for building obstacles.
struct Rect {
  double min_x = 0.0;
  double min_y = 0.0;
  double max_x = 0.0;
  double max_y = 0.0;

  bool contains(Point p) const {
    return p.x >= min_x && p.x <= max_x && p.y >= min_y && p.y <= max_y;
  }
  bool operator==(const Rect&) const = default;
};

/// Closed-segment intersection test, collinear overlaps included.
bool segments_intersect(Point p1, Point p2, Point q1, Point q2);

/// Intersection point of segments p1-p2 and q1-q2 when they cross properly.
bool segment_intersection(Point p1, Point p2, Point q1, Point q2, Point& out);

/// True when segment a-b touches the rectangle (interior or boundary).
bool segment_intersects_rect(Point a, Point b, const Rect& r);

double point_segment_distance(Point p, Point a, Point b);

}  // namespace warnsim
