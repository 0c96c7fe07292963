#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "json.hpp"

#include "warnsim/roadnet/mobility.hpp"
#include "warnsim/sim/rng.hpp"

namespace warnsim::roadnet {

std::string to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::Vehicle: return "vehicle";
    case NodeKind::Pedestrian: return "pedestrian";
    case NodeKind::Rsu: return "rsu";
  }
  return "unknown";
}

MobilityTrace::MobilityTrace(std::vector<TraceRecord> records) {
  std::stable_sort(records.begin(), records.end(), [](const TraceRecord& a, const TraceRecord& b) {
    return a.node < b.node;
  });
  for (const auto& r : records) add(r);
}

void MobilityTrace::add(const TraceRecord& r) {
  if (!std::isfinite(r.time) || !std::isfinite(r.pos.x) || !std::isfinite(r.pos.y) ||
      !std::isfinite(r.speed) || r.speed < 0.0) {
    throw std::invalid_argument("trace record for node " + std::to_string(r.node) +
                                " has non-finite or negative fields");
  }
  if (r.node >= tracks_.size()) tracks_.resize(static_cast<std::size_t>(r.node) + 1);
  auto& tr = tracks_[r.node];
  if (!tr.empty() && !(r.time > tr.back().time)) {
    std::ostringstream os;
    os << "trace times for node " << r.node << " must strictly increase (" << tr.back().time
       << " then " << r.time << ")";
    throw std::invalid_argument(os.str());
  }
  tr.push_back(r);
}

std::span<const TraceRecord> MobilityTrace::track(NodeId node) const {
  if (node >= tracks_.size() || tracks_[node].empty()) {
    throw std::out_of_range("node " + std::to_string(node) + " has no trace records");
  }
  return tracks_[node];
}

double MobilityTrace::start_time(NodeId node) const { return track(node).front().time; }
double MobilityTrace::end_time(NodeId node) const { return track(node).back().time; }

namespace {

Kinematics interpolate(const TraceRecord& a, const TraceRecord& b, double t) {
  const double f = (t - a.time) / (b.time - a.time);
  Kinematics k;
  k.pos = lerp(a.pos, b.pos, f);
  k.speed = a.speed + (b.speed - a.speed) * f;
  const Point d = b.pos - a.pos;
  const double len = norm(d);
  if (len > 0.0) k.heading = d * (1.0 / len);
  return k;
}

Kinematics at_record(std::span<const TraceRecord> tr, std::size_t i) {
  Kinematics k;
  k.pos = tr[i].pos;
  k.speed = tr[i].speed;
  // Heading of the leg leaving the record (or arriving, for the last one).
  if (i + 1 < tr.size()) {
    const Point d = tr[i + 1].pos - tr[i].pos;
    if (norm(d) > 0.0) k.heading = d * (1.0 / norm(d));
  } else if (i > 0) {
    const Point d = tr[i].pos - tr[i - 1].pos;
    if (norm(d) > 0.0) k.heading = d * (1.0 / norm(d));
  }
  return k;
}

}  // namespace

Kinematics MobilityTrace::position_at(NodeId node, double t) const {
  const auto tr = track(node);
  if (t < tr.front().time || t > tr.back().time) {
    std::ostringstream os;
    os << "time " << t << " outside trace span [" << tr.front().time << ", " << tr.back().time
       << "] of node " << node;
    throw std::out_of_range(os.str());
  }
  auto it = std::upper_bound(tr.begin(), tr.end(), t,
                             [](double v, const TraceRecord& r) { return v < r.time; });
  const std::size_t hi = static_cast<std::size_t>(it - tr.begin());
  const std::size_t lo = hi - 1;
  if (tr[lo].time == t || hi == tr.size()) return at_record(tr, lo);
  return interpolate(tr[lo], tr[hi], t);
}

std::vector<TraceRecord> MobilityTrace::records() const {
  std::vector<TraceRecord> out;
  for (const auto& tr : tracks_) out.insert(out.end(), tr.begin(), tr.end());
  std::stable_sort(out.begin(), out.end(), [](const TraceRecord& a, const TraceRecord& b) {
    return a.time < b.time || (a.time == b.time && a.node < b.node);
  });
  return out;
}

TraceCursor::TraceCursor(const MobilityTrace& trace, NodeId node) : track_(trace.track(node)) {}

Kinematics TraceCursor::at(double t) {
  if (t <= track_.front().time) return at_record(track_, 0);
  if (t >= track_.back().time) return at_record(track_, track_.size() - 1);
  if (t < track_[idx_].time) idx_ = 0;
  while (idx_ + 1 < track_.size() && track_[idx_ + 1].time <= t) ++idx_;
  if (track_[idx_].time == t) return at_record(track_, idx_);
  return interpolate(track_[idx_], track_[idx_ + 1], t);
}

MobilityTrace read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("trace file is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "time,node_id,x,y,speed") {
    throw std::invalid_argument("trace header must be 'time,node_id,x,y,speed', got '" + line + "'");
  }
  std::vector<TraceRecord> recs;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    TraceRecord r;
    char c1 = 0, c2 = 0, c3 = 0, c4 = 0;
    long long node = -1;
    if (!(ls >> r.time >> c1 >> node >> c2 >> r.pos.x >> c3 >> r.pos.y >> c4 >> r.speed) ||
        c1 != ',' || c2 != ',' || c3 != ',' || c4 != ',' || node < 0) {
      throw std::invalid_argument("malformed trace record on line " + std::to_string(lineno));
    }
    r.node = static_cast<NodeId>(node);
    recs.push_back(r);
  }
  return MobilityTrace(std::move(recs));
}

void write_trace_csv(std::ostream& out, const MobilityTrace& trace) {
  out << "time,node_id,x,y,speed\n";
  char buf[160];
  for (const auto& r : trace.records()) {
    std::snprintf(buf, sizeof buf, "%.6f,%u,%.6f,%.6f,%.6f\n", r.time, r.node, r.pos.x, r.pos.y,
                  r.speed);
    out << buf;
  }
}

RoadGraph make_grid_graph(double width, double height, double block_size, double speed_limit,
                          bool obstacles, double obstacle_inset) {
  if (!(width > 0.0) || !(height > 0.0)) throw std::invalid_argument("grid area must be positive");
  if (!(block_size > 0.0) || !(block_size < std::min(width, height))) {
    throw std::invalid_argument("block_size must be positive and smaller than both area sides");
  }
  const int cols = static_cast<int>(std::floor(width / block_size + 1e-9)) + 1;
  const int rows = static_cast<int>(std::floor(height / block_size + 1e-9)) + 1;
  std::vector<Intersection> ins;
  ins.reserve(static_cast<std::size_t>(cols) * rows);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      ins.push_back({static_cast<std::uint32_t>(r * cols + c), {c * block_size, r * block_size}});
    }
  }
  std::vector<Segment> segs;
  std::uint32_t sid = 0;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c + 1 < cols; ++c) {
      const auto a = static_cast<std::uint32_t>(r * cols + c);
      segs.push_back({sid++, a, a + 1, block_size, speed_limit});
    }
  }
  for (int r = 0; r + 1 < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const auto a = static_cast<std::uint32_t>(r * cols + c);
      segs.push_back({sid++, a, a + static_cast<std::uint32_t>(cols), block_size, speed_limit});
    }
  }
  // Lengths are recomputed from coordinates to keep the 1e-6 invariant exact.
  for (auto& s : segs) s.length = distance(ins[s.a].pos, ins[s.b].pos);
  std::vector<Rect> rects;
  if (obstacles) {
    for (int r = 0; r + 1 < rows; ++r) {
      for (int c = 0; c + 1 < cols; ++c) {
        Rect rc{c * block_size + obstacle_inset, r * block_size + obstacle_inset,
                (c + 1) * block_size - obstacle_inset, (r + 1) * block_size - obstacle_inset};
        if (rc.max_x > rc.min_x && rc.max_y > rc.min_y) rects.push_back(rc);
      }
    }
  }
  return RoadGraph(std::move(ins), std::move(segs), std::move(rects));
}

namespace {

class TripPlanner {
 public:
  explicit TripPlanner(const RoadGraph& g) : g_(g) {}

  const std::vector<double>& dist_to(std::uint32_t dest) {
    auto it = cache_.find(dest);
    if (it == cache_.end()) it = cache_.emplace(dest, g_.distances_to(dest)).first;
    return it->second;
  }

  // Random choice among neighbors that stay on a shortest path to dest.
  std::uint32_t next_hop(std::uint32_t cur, std::uint32_t dest, sim::RngStream& rng) {
    const auto& d = dist_to(dest);
    const double here = d[g_.index_of(cur)];
    std::vector<std::uint32_t> options;
    for (std::uint32_t sid : g_.incident(cur)) {
      const Segment& s = g_.segment(sid);
      const std::uint32_t n = g_.other_end(s, cur);
      if (std::abs(d[g_.index_of(n)] + s.length - here) <= 1e-6 * std::max(1.0, here)) {
        options.push_back(n);
      }
    }
    if (options.empty()) throw std::logic_error("no shortest-path continuation");
    return options[rng.index(options.size())];
  }

  std::uint32_t random_destination(std::uint32_t not_this, sim::RngStream& rng) const {
    const auto ins = g_.intersections();
    if (ins.size() == 1) return ins[0].id;
    for (;;) {
      const std::uint32_t id = ins[rng.index(ins.size())].id;
      if (id != not_this) return id;
    }
  }

 private:
  const RoadGraph& g_;
  std::map<std::uint32_t, std::vector<double>> cache_;
};

void append_trip_walker(const RoadGraph& g, TripPlanner& planner, MobilityTrace& trace, NodeId node,
                        double speed, double duration, sim::RngStream& rng) {
  const auto segs = g.segments();
  const Segment& s = segs[rng.index(segs.size())];
  const double f = rng.uniform();
  const Point pa = g.intersection(s.a).pos;
  const Point pb = g.intersection(s.b).pos;
  Point pos = lerp(pa, pb, f);
  std::uint32_t next = rng.bernoulli(0.5) ? s.a : s.b;
  double t = 0.0;
  trace.add({t, node, pos, speed});
  std::uint32_t dest = planner.random_destination(next, rng);
  while (t < duration) {
    const Point target = g.intersection(next).pos;
    const double leg = distance(pos, target);
    const double arrive = t + leg / speed;
    if (arrive >= duration) {
      const double frac = (duration - t) / (arrive - t);
      const Point end = lerp(pos, target, frac);
      if (duration > t) trace.add({duration, node, end, speed});
      break;
    }
    if (leg > 1e-9) {
      t = arrive;
      pos = target;
      trace.add({t, node, pos, speed});
    }
    const std::uint32_t here = next;
    if (here == dest) dest = planner.random_destination(here, rng);
    next = planner.next_hop(here, dest, rng);
  }
}

}  // namespace

void append_vehicle_trips(const RoadGraph& graph, MobilityTrace& trace,
                          std::vector<NodeKind>& kinds, std::size_t count, double duration,
                          double min_speed_fraction, std::uint64_t seed) {
  sim::RngStream rng(seed, sim::StreamId::Mobility);
  TripPlanner planner(graph);
  double limit = std::numeric_limits<double>::infinity();
  for (const auto& s : graph.segments()) limit = std::min(limit, s.speed_limit);
  for (std::size_t i = 0; i < count; ++i) {
    const auto node = static_cast<NodeId>(trace.node_count());
    const double speed = limit * rng.uniform(min_speed_fraction, 1.0);
    append_trip_walker(graph, planner, trace, node, speed, duration, rng);
    kinds.push_back(NodeKind::Vehicle);
  }
}

void append_waypoint_walkers(const RoadGraph& graph, MobilityTrace& trace,
                             std::vector<NodeKind>& kinds, std::size_t count, double speed,
                             double duration, NodeKind kind, std::uint64_t seed) {
  if (!(speed > 0.0)) throw std::invalid_argument("walker speed must be positive");
  // Separate substream label so pedestrians do not shift vehicle draws.
  sim::RngStream rng(seed ^ 0x9e3779b97f4a7c15ull, sim::StreamId::Mobility);
  TripPlanner planner(graph);
  for (std::size_t i = 0; i < count; ++i) {
    const auto node = static_cast<NodeId>(trace.node_count());
    append_trip_walker(graph, planner, trace, node, speed, duration, rng);
    kinds.push_back(kind);
  }
}

GridScenario generate_grid(const GridSpec& spec) {
  if (!(spec.area_width > 0.0) || !(spec.area_height > 0.0)) {
    throw std::invalid_argument("grid area must have positive width and height");
  }
  if (!(spec.density > 0.0)) throw std::invalid_argument("vehicle density must be positive");
  if (!(spec.duration > 0.0)) throw std::invalid_argument("trace duration must be positive");
  if (!(spec.min_speed_fraction > 0.0) || spec.min_speed_fraction > 1.0) {
    throw std::invalid_argument("min_speed_fraction must lie in (0, 1]");
  }
  RoadGraph graph = make_grid_graph(spec.area_width, spec.area_height, spec.block_size,
                                    spec.speed_limit, spec.obstacles, spec.obstacle_inset);
  const double area_km2 = spec.area_width * spec.area_height / 1e6;
  const auto count = static_cast<std::size_t>(std::llround(spec.density * area_km2));
  MobilityTrace trace;
  std::vector<NodeKind> kinds;
  append_vehicle_trips(graph, trace, kinds, count, spec.duration, spec.min_speed_fraction,
                       spec.seed);
  return GridScenario{std::move(graph), std::move(trace), std::move(kinds)};
}

RoadGraph read_graph_json(std::istream& in) {
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("road graph file is not valid JSON: ") + e.what());
  }
  std::vector<Intersection> ins;
  std::vector<Segment> segs;
  std::vector<Rect> obs;
  try {
    for (const auto& e : j.at("intersections")) {
      ins.push_back({e.at("id").get<std::uint32_t>(), {e.at("x").get<double>(), e.at("y").get<double>()}});
    }
    for (const auto& e : j.at("segments")) {
      segs.push_back({e.at("id").get<std::uint32_t>(), e.at("a").get<std::uint32_t>(),
                      e.at("b").get<std::uint32_t>(), e.at("length").get<double>(),
                      e.at("speed_limit").get<double>()});
    }
    if (j.contains("obstacles")) {
      for (const auto& e : j.at("obstacles")) {
        obs.push_back({e.at("min_x").get<double>(), e.at("min_y").get<double>(),
                       e.at("max_x").get<double>(), e.at("max_y").get<double>()});
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("road graph file: ") + e.what());
  }
  return RoadGraph(std::move(ins), std::move(segs), std::move(obs));
}

void write_graph_json(std::ostream& out, const RoadGraph& graph) {
  nlohmann::json j;
  j["intersections"] = nlohmann::json::array();
  for (const auto& in : graph.intersections()) {
    j["intersections"].push_back({{"id", in.id}, {"x", in.pos.x}, {"y", in.pos.y}});
  }
  j["segments"] = nlohmann::json::array();
  for (const auto& s : graph.segments()) {
    j["segments"].push_back({{"id", s.id},
                             {"a", s.a},
                             {"b", s.b},
                             {"length", s.length},
                             {"speed_limit", s.speed_limit}});
  }
  j["obstacles"] = nlohmann::json::array();
  for (const auto& r : graph.obstacles()) {
    j["obstacles"].push_back(
        {{"min_x", r.min_x}, {"min_y", r.min_y}, {"max_x", r.max_x}, {"max_y", r.max_y}});
  }
  out << j.dump(2) << '\n';
}

}  // namespace warnsim::roadnet
