#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "doctest.h"
#include "warnsim/roadnet/mobility.hpp"
#include "warnsim/roadnet/road_graph.hpp"

using namespace warnsim;
using namespace warnsim::roadnet;

namespace {

RoadGraph square() {
  return RoadGraph({{0, {0, 0}}, {1, {100, 0}}, {2, {100, 100}}, {3, {0, 100}}},
                   {{0, 0, 1, 100, 10}, {1, 1, 2, 100, 10}, {2, 2, 3, 100, 10}, {3, 3, 0, 100, 10}});
}

NearestIntersection brute_nearest(const RoadGraph& g, Point p) {
  NearestIntersection best{0, INFINITY};
  for (const auto& i : g.intersections()) {
    const double d = distance(i.pos, p);
    if (d < best.distance || (d == best.distance && i.id < best.id)) best = {i.id, d};
  }
  return best;
}

void check_graph_invariants(const RoadGraph& g) {
  for (const auto& s : g.segments()) {
    const double d = distance(g.intersection(s.a).pos, g.intersection(s.b).pos);
    REQUIRE(std::abs(d - s.length) <= 1e-6);
  }
  // connectivity via shortest-path distances
  const auto dist = g.distances_to(g.intersections().front().id);
  for (double d : dist) REQUIRE(std::isfinite(d));
}

}  // namespace

TEST_SUITE("roadnet") {
  TEST_CASE("graph construction rejects broken structure") {
    CHECK_THROWS_AS(RoadGraph({{0, {0, 0}}, {1, {100, 0}}}, {{0, 0, 1, 90, 10}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(RoadGraph({{0, {0, 0}}, {1, {100, 0}}}, {{0, 0, 5, 100, 10}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(RoadGraph({{0, {0, 0}}, {1, {0, 0}}}, {{0, 0, 1, 0, 10}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(RoadGraph({{0, {0, 0}}, {1, {100, 0}}, {2, {500, 500}}}, {{0, 0, 1, 100, 10}}),
                    std::invalid_argument);
  }

  TEST_CASE("nearest intersection on a node and at a midpoint") {
    const auto g = square();
    auto n = g.nearest_intersection({100, 100});
    CHECK(n.id == 2);
    CHECK(n.distance == 0.0);
    n = g.nearest_intersection({50, 0});
    CHECK(n.id == 0);
    CHECK(n.distance == 50.0);
  }

  TEST_CASE("nearest intersection agrees with exhaustive scan") {
    const auto g = make_grid_graph(2500, 2500, 250, 13.89, false, 5.0);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-100.0, 2600.0);
    for (int i = 0; i < 5000; ++i) {
      const Point p{u(rng), u(rng)};
      const auto a = g.nearest_intersection(p);
      const auto b = brute_nearest(g, p);
      REQUIRE(a.id == b.id);
      REQUIRE(a.distance == b.distance);
    }
  }

  TEST_CASE("intersection radius has a closed boundary") {
    const auto g = square();
    CHECK(g.is_at_intersection({5, 0}, 10.0));
    CHECK(g.is_at_intersection({10, 0}, 10.0));
    CHECK_FALSE(g.is_at_intersection({10.0001, 0}, 10.0));
  }

  TEST_CASE("generate_grid vehicle counts") {
    GridSpec spec{2500, 2500, 250, 40, 1, 5.0};
    CHECK(generate_grid(spec).trace.node_count() == 250);
    spec.density = 100;
    CHECK(generate_grid(spec).trace.node_count() == 625);
  }

  TEST_CASE("generate_grid rejects degenerate inputs") {
    CHECK_THROWS(generate_grid(GridSpec{1000, 1000, 250, 0, 1}));
    CHECK_THROWS(generate_grid(GridSpec{0, 1000, 250, 10, 1}));
    CHECK_THROWS(generate_grid(GridSpec{1000, 1000, 1000, 10, 1}));
  }

  TEST_CASE("generate_grid is deterministic under seed") {
    GridSpec spec{1000, 1000, 250, 30, 77, 10.0};
    const auto a = generate_grid(spec).trace.records();
    const auto b = generate_grid(spec).trace.records();
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      REQUIRE(a[i].pos == b[i].pos);
      REQUIRE(a[i].time == b[i].time);
    }
  }

  TEST_CASE("random grids satisfy graph invariants and keep vehicles on roads") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 12; ++trial) {
      GridSpec spec;
      spec.block_size = std::uniform_real_distribution<double>(80, 300)(rng);
      spec.area_width = spec.block_size * std::uniform_int_distribution<int>(2, 8)(rng);
      spec.area_height = spec.block_size * std::uniform_int_distribution<int>(2, 8)(rng);
      spec.density = std::uniform_real_distribution<double>(5, 120)(rng);
      spec.seed = rng();
      spec.duration = 20.0;
      spec.obstacles = trial % 2 == 0;
      const auto sc = generate_grid(spec);
      check_graph_invariants(sc.graph);
      for (NodeId n = 0; n < sc.trace.node_count(); ++n) {
        const double t0 = sc.trace.start_time(n), t1 = sc.trace.end_time(n);
        for (double t = t0; t <= t1; t += 0.37) {
          const auto k = sc.trace.position_at(n, t);
          REQUIRE(sc.graph.distance_to_network(k.pos) <= 0.5);
          REQUIRE(k.speed <= spec.speed_limit + 1e-9);
        }
      }
    }
  }

  TEST_CASE("position_at interpolates and rejects times outside the span") {
    MobilityTrace tr;
    tr.add({0.0, 0, {0, 0}, 10});
    tr.add({10.0, 0, {100, 0}, 10});
    CHECK(tr.position_at(0, 5.0).pos.x == doctest::Approx(50.0));
    CHECK(tr.position_at(0, 10.0).pos == Point{100, 0});
    try {
      tr.position_at(0, 11.0);
      FAIL("expected out_of_range");
    } catch (const std::out_of_range& e) {
      const std::string w = e.what();
      CHECK(w.find("node 0") != std::string::npos);
    }
    CHECK_THROWS(tr.add({10.0, 0, {100, 0}, 10}));
  }

  TEST_CASE("trace cursor matches random-access playback") {
    const auto sc = generate_grid(GridSpec{1000, 1000, 250, 20, 3, 15.0});
    for (NodeId n = 0; n < sc.trace.node_count(); ++n) {
      TraceCursor c(sc.trace, n);
      for (double t = sc.trace.start_time(n); t <= sc.trace.end_time(n); t += 0.1) {
        REQUIRE(c.at(t).pos == sc.trace.position_at(n, t).pos);
      }
    }
  }

  TEST_CASE("trace CSV round trip") {
    const auto sc = generate_grid(GridSpec{1000, 1000, 250, 10, 4, 5.0});
    std::stringstream ss;
    write_trace_csv(ss, sc.trace);
    CHECK(ss.str().rfind("time,node_id,x,y,speed\n", 0) == 0);
    const auto back = read_trace_csv(ss);
    CHECK(back.node_count() == sc.trace.node_count());
    std::stringstream bad("time,node_id,x,y,speed\n0,0,1,2\n");
    CHECK_THROWS(read_trace_csv(bad));
  }

  TEST_CASE("graph JSON round trip") {
    const auto g = make_grid_graph(750, 500, 250, 13.89, true, 5.0);
    std::stringstream ss;
    write_graph_json(ss, g);
    const auto back = read_graph_json(ss);
    CHECK(back.intersections().size() == g.intersections().size());
    CHECK(back.segments().size() == g.segments().size());
    CHECK(back.obstacles().size() == g.obstacles().size());
  }

  TEST_CASE("obstacles block lines of sight across blocks only") {
    const auto g = make_grid_graph(500, 500, 250, 13.89, true, 5.0);
    CHECK(g.blocked({0, 0}, {250, 250}));
    CHECK_FALSE(g.blocked({0, 0}, {250, 0}));
    CHECK_FALSE(g.blocked({0, 0}, {0, 500}));
  }

  TEST_CASE("pedestrian walkers stay on the network") {
    const auto g = make_grid_graph(600, 600, 100, 13.89, false, 5.0);
    MobilityTrace tr;
    std::vector<NodeKind> kinds;
    append_waypoint_walkers(g, tr, kinds, 50, 1.4, 30.0, NodeKind::Pedestrian, 8);
    CHECK(tr.node_count() == 50);
    CHECK(kinds.size() == 50);
    for (NodeId n = 0; n < 50; ++n) {
      for (double t = tr.start_time(n); t <= tr.end_time(n); t += 1.0) {
        REQUIRE(g.distance_to_network(tr.position_at(n, t).pos) <= 0.5);
      }
    }
  }
}
