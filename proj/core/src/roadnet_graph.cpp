#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <set>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "warnsim/roadnet/geometry.hpp"
#include "warnsim/roadnet/road_graph.hpp"

namespace warnsim {

namespace {

int orientation(Point a, Point b, Point c) {
  const double v = cross(b - a, c - a);
  if (v > 0) return 1;
  if (v < 0) return -1;
  return 0;
}

bool on_segment(Point a, Point b, Point p) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
         p.y <= std::max(a.y, b.y);
}

}  // namespace

bool segments_intersect(Point p1, Point p2, Point q1, Point q2) {
  const int o1 = orientation(p1, p2, q1);
  const int o2 = orientation(p1, p2, q2);
  const int o3 = orientation(q1, q2, p1);
  const int o4 = orientation(q1, q2, p2);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(p1, p2, q1)) return true;
  if (o2 == 0 && on_segment(p1, p2, q2)) return true;
  if (o3 == 0 && on_segment(q1, q2, p1)) return true;
  if (o4 == 0 && on_segment(q1, q2, p2)) return true;
  return false;
}

bool segment_intersection(Point p1, Point p2, Point q1, Point q2, Point& out) {
  const Point r = p2 - p1;
  const Point s = q2 - q1;
  const double denom = cross(r, s);
  if (denom == 0.0) return false;
  const double t = cross(q1 - p1, s) / denom;
  const double u = cross(q1 - p1, r) / denom;
  if (t < 0.0 || t > 1.0 || u < 0.0 || u > 1.0) return false;
  out = p1 + r * t;
  return true;
}

bool segment_intersects_rect(Point a, Point b, const Rect& rc) {
  if (rc.contains(a) || rc.contains(b)) return true;
  const Point c1{rc.min_x, rc.min_y};
  const Point c2{rc.max_x, rc.min_y};
  const Point c3{rc.max_x, rc.max_y};
  const Point c4{rc.min_x, rc.max_y};
  return segments_intersect(a, b, c1, c2) || segments_intersect(a, b, c2, c3) ||
         segments_intersect(a, b, c3, c4) || segments_intersect(a, b, c4, c1);
}

double point_segment_distance(Point p, Point a, Point b) {
  const Point ab = b - a;
  const double len2 = dot(ab, ab);
  if (len2 == 0.0) return distance(p, a);
  const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
  return distance(p, a + ab * t);
}

}  // namespace warnsim

namespace warnsim::roadnet {

RoadGraph::RoadGraph(std::vector<Intersection> intersections, std::vector<Segment> segments,
                     std::vector<Rect> obstacles)
    : intersections_(std::move(intersections)),
      segments_(std::move(segments)),
      obstacles_(std::move(obstacles)) {
  if (intersections_.empty()) throw std::invalid_argument("road graph has no intersections");
  std::sort(intersections_.begin(), intersections_.end(),
            [](const Intersection& a, const Intersection& b) { return a.id < b.id; });
  std::sort(segments_.begin(), segments_.end(),
            [](const Segment& a, const Segment& b) { return a.id < b.id; });

  for (std::size_t i = 1; i < intersections_.size(); ++i) {
    if (intersections_[i].id == intersections_[i - 1].id) {
      throw std::invalid_argument("duplicate intersection id " +
                                  std::to_string(intersections_[i].id));
    }
  }
  {
    std::set<std::pair<double, double>> coords;
    for (const auto& in : intersections_) {
      if (!std::isfinite(in.pos.x) || !std::isfinite(in.pos.y)) {
        throw std::invalid_argument("intersection " + std::to_string(in.id) +
                                    " has non-finite coordinates");
      }
      if (!coords.emplace(in.pos.x, in.pos.y).second) {
        throw std::invalid_argument("intersection " + std::to_string(in.id) +
                                    " duplicates the coordinates of another intersection");
      }
    }
  }

  incident_.assign(intersections_.size(), {});
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    const Segment& s = segments_[i];
    if (i > 0 && segments_[i - 1].id == s.id) {
      throw std::invalid_argument("duplicate segment id " + std::to_string(s.id));
    }
    const auto find = [&](std::uint32_t id) {
      auto it = std::lower_bound(intersections_.begin(), intersections_.end(), id,
                                 [](const Intersection& in, std::uint32_t v) { return in.id < v; });
      if (it == intersections_.end() || it->id != id) {
        throw std::invalid_argument("segment " + std::to_string(s.id) +
                                    " references missing intersection " + std::to_string(id));
      }
      return static_cast<std::size_t>(it - intersections_.begin());
    };
    const std::size_t ia = find(s.a);
    const std::size_t ib = find(s.b);
    if (ia == ib) throw std::invalid_argument("segment " + std::to_string(s.id) + " is a loop");
    const double euclid = distance(intersections_[ia].pos, intersections_[ib].pos);
    if (std::abs(euclid - s.length) > 1e-6) {
      std::ostringstream os;
      os << "segment " << s.id << " length " << s.length << " differs from endpoint distance "
         << euclid;
      throw std::invalid_argument(os.str());
    }
    if (!(s.speed_limit > 0.0)) {
      throw std::invalid_argument("segment " + std::to_string(s.id) +
                                  " needs a positive speed limit");
    }
    incident_[ia].push_back(s.id);
    incident_[ib].push_back(s.id);
  }

  // Connectivity over intersections.
  std::vector<bool> seen(intersections_.size(), false);
  std::vector<std::size_t> stack{0};
  seen[0] = true;
  std::size_t reached = 1;
  while (!stack.empty()) {
    const std::size_t cur = stack.back();
    stack.pop_back();
    for (std::uint32_t sid : incident_[cur]) {
      const Segment& s = segment(sid);
      const std::size_t nxt = index_of(other_end(s, intersections_[cur].id));
      if (!seen[nxt]) {
        seen[nxt] = true;
        ++reached;
        stack.push_back(nxt);
      }
    }
  }
  if (reached != intersections_.size()) {
    throw std::invalid_argument("road graph is not connected");
  }

  build_index();
}

std::size_t RoadGraph::index_of(std::uint32_t id) const {
  auto it = std::lower_bound(intersections_.begin(), intersections_.end(), id,
                             [](const Intersection& in, std::uint32_t v) { return in.id < v; });
  if (it == intersections_.end() || it->id != id) {
    throw std::out_of_range("unknown intersection id " + std::to_string(id));
  }
  return static_cast<std::size_t>(it - intersections_.begin());
}

const Intersection& RoadGraph::intersection(std::uint32_t id) const {
  return intersections_[index_of(id)];
}

const Segment& RoadGraph::segment(std::uint32_t id) const {
  auto it = std::lower_bound(segments_.begin(), segments_.end(), id,
                             [](const Segment& s, std::uint32_t v) { return s.id < v; });
  if (it == segments_.end() || it->id != id) {
    throw std::out_of_range("unknown segment id " + std::to_string(id));
  }
  return *it;
}

std::span<const std::uint32_t> RoadGraph::incident(std::uint32_t intersection_id) const {
  return incident_[index_of(intersection_id)];
}

void RoadGraph::build_index() {
  min_x_ = max_x_ = intersections_.front().pos.x;
  min_y_ = max_y_ = intersections_.front().pos.y;
  for (const auto& in : intersections_) {
    min_x_ = std::min(min_x_, in.pos.x);
    max_x_ = std::max(max_x_, in.pos.x);
    min_y_ = std::min(min_y_, in.pos.y);
    max_y_ = std::max(max_y_, in.pos.y);
  }
  const double w = std::max(max_x_ - min_x_, 1.0);
  const double h = std::max(max_y_ - min_y_, 1.0);
  // Roughly two intersections per bucket.
  const double target = std::max(1.0, static_cast<double>(intersections_.size()) / 2.0);
  cell_ = std::max(1.0, std::sqrt(w * h / target));
  cols_ = std::max(1, static_cast<int>(std::floor(w / cell_)) + 1);
  rows_ = std::max(1, static_cast<int>(std::floor(h / cell_)) + 1);
  buckets_.assign(static_cast<std::size_t>(cols_) * rows_, {});
  for (std::size_t i = 0; i < intersections_.size(); ++i) {
    const int cx = std::clamp(static_cast<int>((intersections_[i].pos.x - min_x_) / cell_), 0,
                              cols_ - 1);
    const int cy = std::clamp(static_cast<int>((intersections_[i].pos.y - min_y_) / cell_), 0,
                              rows_ - 1);
    buckets_[static_cast<std::size_t>(cy) * cols_ + cx].push_back(static_cast<std::uint32_t>(i));
  }
}

NearestIntersection RoadGraph::nearest_intersection(Point p) const {
  NearestIntersection best{0, std::numeric_limits<double>::infinity()};
  const auto consider = [&](std::size_t idx) {
    const Intersection& in = intersections_[idx];
    const double d = distance(p, in.pos);
    if (d < best.distance || (d == best.distance && in.id < best.id)) best = {in.id, d};
  };

  const bool inside = p.x >= min_x_ && p.x < min_x_ + cols_ * cell_ && p.y >= min_y_ &&
                      p.y < min_y_ + rows_ * cell_;
  if (!inside) {
    for (std::size_t i = 0; i < intersections_.size(); ++i) consider(i);
    return best;
  }
  const int cx = std::clamp(static_cast<int>((p.x - min_x_) / cell_), 0, cols_ - 1);
  const int cy = std::clamp(static_cast<int>((p.y - min_y_) / cell_), 0, rows_ - 1);
  const int max_ring = std::max(cols_, rows_);
  for (int ring = 0; ring <= max_ring; ++ring) {
    // Every cell at Chebyshev ring k lies at least (k - 1) * cell_ away.
    if (ring >= 1 && best.distance < (ring - 1) * cell_) break;
    for (int dy = -ring; dy <= ring; ++dy) {
      for (int dx = -ring; dx <= ring; ++dx) {
        if (std::max(std::abs(dx), std::abs(dy)) != ring) continue;
        const int x = cx + dx;
        const int y = cy + dy;
        if (x < 0 || y < 0 || x >= cols_ || y >= rows_) continue;
        for (std::uint32_t idx : buckets_[static_cast<std::size_t>(y) * cols_ + x]) consider(idx);
      }
    }
  }
  return best;
}

bool RoadGraph::is_at_intersection(Point p, double radius) const {
  if (!(radius > 0.0)) throw std::invalid_argument("intersection radius must be positive");
  return nearest_intersection(p).distance <= radius;
}

bool RoadGraph::blocked(Point a, Point b) const {
  for (const Rect& r : obstacles_) {
    if (segment_intersects_rect(a, b, r)) return true;
  }
  return false;
}

double RoadGraph::distance_to_network(Point p) const {
  double best = std::numeric_limits<double>::infinity();
  for (const Segment& s : segments_) {
    best = std::min(best, point_segment_distance(p, intersection(s.a).pos, intersection(s.b).pos));
  }
  return best;
}

std::vector<double> RoadGraph::distances_to(std::uint32_t target) const {
  std::vector<double> dist(intersections_.size(), std::numeric_limits<double>::infinity());
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  const std::size_t t = index_of(target);
  dist[t] = 0.0;
  pq.emplace(0.0, t);
  while (!pq.empty()) {
    auto [d, cur] = pq.top();
    pq.pop();
    if (d > dist[cur]) continue;
    for (std::uint32_t sid : incident_[cur]) {
      const Segment& s = segment(sid);
      const std::size_t nxt = index_of(other_end(s, intersections_[cur].id));
      const double nd = d + s.length;
      if (nd < dist[nxt]) {
        dist[nxt] = nd;
        pq.emplace(nd, nxt);
      }
    }
  }
  return dist;
}

}  // namespace warnsim::roadnet
