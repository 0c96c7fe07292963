#include <random>
#include <set>

#include "doctest.h"
#include "support.hpp"
#include "warnsim/routing/gpsr.hpp"
#include "warnsim/routing/multimetric.hpp"
#include "warnsim/routing/neighbor_table.hpp"

using namespace warnsim;
using namespace warnsim::routing;
using testsupport::neighbors_of;

namespace {

NeighborEntry at(NodeId id, Point p) {
  NeighborEntry e;
  e.id = id;
  e.pos = p;
  return e;
}

std::vector<Point> random_points(std::mt19937_64& rng, std::size_t n, double side) {
  std::uniform_real_distribution<double> u(0.0, side);
  std::vector<Point> pts(n);
  for (auto& p : pts) p = {u(rng), u(rng)};
  return pts;
}

}  // namespace

TEST_SUITE("routing") {
  TEST_CASE("greedy picks the closest strictly advancing neighbor") {
    const Point dest{200, 0};
    const std::vector<NeighborEntry> n{at(1, {50, 0}), at(2, {20, 0})};
    CHECK(gpsr_greedy_next({0, 0}, n, dest) == NodeId{1});
    const std::vector<NeighborEntry> back{at(1, {-10, 0}), at(2, {0, 50})};
    CHECK_FALSE(gpsr_greedy_next({0, 0}, back, dest).has_value());
  }

  TEST_CASE("greedy agrees with the exhaustive oracle") {
    std::mt19937_64 rng(1234);
    for (int trial = 0; trial < 200; ++trial) {
      const auto pts = random_points(rng, 50, 1000.0);
      const Point dest{std::uniform_real_distribution<double>(0, 1000)(rng), 500.0};
      for (std::size_t i = 0; i < pts.size(); ++i) {
        const auto nb = neighbors_of(i, pts, 250.0);
        REQUIRE(gpsr_greedy_next(pts[i], nb, dest) == testsupport::greedy_oracle(pts[i], nb, dest));
      }
    }
  }

  TEST_CASE("greedy hops strictly decrease distance to destination") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 50; ++trial) {
      const auto pts = random_points(rng, 80, 1000.0);
      const auto out = testsupport::route_static(pts, 200.0, 0, 1, false, 200);
      for (std::size_t k = 1; k < out.path.size(); ++k) {
        REQUIRE(distance(pts[out.path[k]], pts[1]) < distance(pts[out.path[k - 1]], pts[1]));
      }
    }
  }

  TEST_CASE("void fixture: greedy stalls, perimeter delivers") {
    const auto pts = testsupport::void_fixture();
    REQUIRE(testsupport::reachable(pts, testsupport::kVoidRange, 0, 6));
    const auto greedy = testsupport::route_static(pts, testsupport::kVoidRange, 0, 6, false, 50);
    CHECK_FALSE(greedy.delivered);
    const auto full = testsupport::route_static(pts, testsupport::kVoidRange, 0, 6, true, 50);
    CHECK(full.delivered);
    CHECK(full.used_perimeter);
  }

  TEST_CASE("connected line never enters perimeter mode") {
    std::vector<Point> pts;
    for (int i = 0; i <= 10; ++i) pts.push_back({i * 90.0, 0.0});
    const auto out = testsupport::route_static(pts, 100.0, 0, 10, true, 50);
    CHECK(out.delivered);
    CHECK_FALSE(out.used_perimeter);
  }

  TEST_CASE("isolated node drops") {
    PerimeterState st;
    const auto d = gpsr_perimeter_next(0, {0, 0}, {}, {100, 0}, st);
    CHECK(d.status == PerimeterStatus::Drop);
  }

  TEST_CASE("gabriel planarization removes witnessed edges") {
    const std::vector<NeighborEntry> n{at(1, {100, 0}), at(2, {50, 10})};
    const auto g = gabriel_neighbors({0, 0}, n);
    REQUIRE(g.size() == 1);
    CHECK(g[0].id == 2);
  }

  TEST_CASE("perimeter routing terminates on random connected fixtures") {
    std::mt19937_64 rng(5150);
    int delivered = 0, tried = 0;
    for (int trial = 0; trial < 300; ++trial) {
      const auto pts = random_points(rng, 40, 800.0);
      const double range = 180.0;
      if (!testsupport::reachable(pts, range, 0, 1)) continue;
      std::size_t edges = 0;
      for (std::size_t i = 0; i < pts.size(); ++i) edges += neighbors_of(i, pts, range).size();
      edges /= 2;
      ++tried;
      const auto out = testsupport::route_static(pts, range, 0, 1, true, 2 * edges + 1);
      REQUIRE(out.hops <= 2 * edges);
      delivered += out.delivered;
    }
    REQUIRE(tried > 50);
    CHECK(delivered * 10 >= tried * 9);
  }

  TEST_CASE("metric normalization examples") {
    MetricConfig cfg;
    NeighborEntry e = at(1, {100, 0});
    auto v = normalize_metrics(e, {0, 0}, {100, 0}, cfg);
    CHECK(v.m_dist == 1.0);
    e.pos = {50, 0};
    e.speed = 10;
    e.heading = {-1, 0};
    v = normalize_metrics(e, {0, 0}, {100, 0}, cfg);
    CHECK(v.m_traj == 0.0);
    CHECK(v.m_dist == doctest::Approx(0.5));
    e.heading = {1, 0};
    CHECK(normalize_metrics(e, {0, 0}, {100, 0}, cfg).m_traj == 1.0);
    e.advertised_mac_loss = 0.2;
    e.advertised_abe = 3e6;
    e.advertised_density = 50;
    v = normalize_metrics(e, {0, 0}, {100, 0}, cfg);
    CHECK(v.m_mac == doctest::Approx(0.8));
    CHECK(v.m_abe == doctest::Approx(0.5));
    CHECK(v.m_density == doctest::Approx(0.5));
  }

  TEST_CASE("multimetric score examples") {
    CHECK(multimetric_score({1, 1, 1, 1, 1}, MetricWeights{0.6, 0.1, 0.1, 0.1, 0.1}) ==
          doctest::Approx(1.0));
    CHECK(multimetric_score({1, 0, 0, 0, 0}, MetricWeights::equal()) == doctest::Approx(0.2));
  }

  TEST_CASE("select_forwarder equals exhaustive argmax") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    MetricConfig cfg;
    for (int trial = 0; trial < 300; ++trial) {
      std::vector<NeighborEntry> nb;
      for (NodeId i = 0; i < 12; ++i) {
        NeighborEntry e = at(i, {u(rng) * 500, u(rng) * 500});
        e.speed = u(rng) * 15;
        const double th = u(rng) * 6.283;
        e.heading = {std::cos(th), std::sin(th)};
        e.advertised_density = u(rng) * 150;
        e.advertised_abe = u(rng) * 6e6;
        e.advertised_mac_loss = u(rng);
        nb.push_back(e);
      }
      auto w = floor_and_normalize({u(rng), u(rng), u(rng), u(rng), u(rng)}, 0.05);
      const auto weights = MetricWeights::from_array(w);
      const Point cur{250, 250}, dest{1000, 250};
      const auto pick = select_forwarder(nb, cur, dest, weights, cfg);
      REQUIRE(pick.has_value());
      double best = -1.0;
      NodeId best_id = kNoNode;
      for (const auto& e : nb) {
        const double s = multimetric_score(normalize_metrics(e, cur, dest, cfg), weights);
        if (s > best) {
          best = s;
          best_id = e.id;
        }
      }
      REQUIRE(pick->id == best_id);
      REQUIRE(pick->score == doctest::Approx(best));
    }
  }

  TEST_CASE("equal weights with constant side metrics reduce to greedy") {
    std::mt19937_64 rng(31);
    MetricConfig cfg;
    for (int trial = 0; trial < 200; ++trial) {
      const auto pts = random_points(rng, 30, 800.0);
      const Point dest{800, 400};
      auto nb = neighbors_of(0, pts, 300.0);
      for (auto& e : nb) {
        e.advertised_density = 40;
        e.advertised_abe = 3e6;
        e.advertised_mac_loss = 0.1;
      }
      const auto g = gpsr_greedy_next(pts[0], nb, dest);
      if (!g) continue;
      const auto m = select_forwarder(nb, pts[0], dest, MetricWeights::equal(), cfg);
      REQUIRE(m.has_value());
      REQUIRE(m->id == *g);
    }
  }

  TEST_CASE("dsw examples") {
    const MetricWeights prev{0.4, 0.15, 0.15, 0.15, 0.15};
    std::vector<MetricVector> same(3, MetricVector{0.5, 0.5, 1, 0.5, 0.9});
    auto w = dsw_update(same, MetricWeights::equal(), 1.0, 0.05);
    for (double x : w.as_array()) CHECK(x == doctest::Approx(0.2));

    // Hand computation: CoV of m_dist is positive, every other CoV is 0,
    // so the candidate is (1,0,0,0,0); flooring at 0.05 gives 0.8 / 0.05.
    std::vector<MetricVector> vary{{0.2, 0.5, 1, 0.5, 0.9}, {0.5, 0.5, 1, 0.5, 0.9},
                                   {0.8, 0.5, 1, 0.5, 0.9}};
    w = dsw_update(vary, prev, 1.0, 0.05);
    CHECK(w.w_dist == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(w.w_density == doctest::Approx(0.05).epsilon(1e-12));
    CHECK(w.w_mac == doctest::Approx(0.05).epsilon(1e-12));

    w = dsw_update(vary, prev, 0.0, 0.05);
    CHECK(w.w_dist == doctest::Approx(0.4));
    CHECK(w.w_abe == doctest::Approx(0.15));

    const std::vector<MetricVector> one{{0.2, 0.5, 1, 0.5, 0.9}};
    w = dsw_update(one, prev, 1.0, 0.05);
    CHECK(w.w_traj == doctest::Approx(0.2));
  }

  TEST_CASE("dsw keeps weights on the floored simplex") {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    MetricWeights w = MetricWeights::equal();
    for (int i = 0; i < 5000; ++i) {
      std::vector<MetricVector> snaps(2 + rng() % 10);
      for (auto& s : snaps) {
        s = {u(rng), u(rng) < 0.3 ? 0.0 : u(rng), static_cast<double>(rng() % 2), u(rng), u(rng)};
      }
      const double floor = u(rng) * 0.2;
      w = dsw_update(snaps, w, u(rng), floor);
      REQUIRE(w.valid(floor));
    }
  }

  TEST_CASE("neighbor table freshness") {
    NeighborTable t;
    auto hello = [](NodeId id, double when) {
      NeighborEntry e = at(id, {0, 0});
      e.last_heard = when;
      return e;
    };
    CHECK(t.upsert(hello(3, 0.0), 0.0, 3.0));
    CHECK_FALSE(t.upsert(hello(3, 1.0), 1.0, 3.0));
    CHECK(t.upsert(hello(1, 2.0), 2.0, 3.0));
    CHECK(t.fresh_count(3.5, 3.0) == 2);
    CHECK(t.fresh_count(4.5, 3.0) == 1);
    CHECK(t.upsert(hello(3, 5.0), 5.0, 3.0));
    CHECK(t.find(3)->last_heard == 5.0);
    t.expire(10.0, 3.0);
    CHECK(t.all().empty());
  }
}
