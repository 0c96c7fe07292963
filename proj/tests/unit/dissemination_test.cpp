#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "support.hpp"
#include "warnsim/dissemination/frames.hpp"
#include "warnsim/dissemination/games.hpp"
#include "warnsim/dissemination/protocol.hpp"
#include "warnsim/dissemination/timers.hpp"
#include "warnsim/sim/rng.hpp"

using namespace warnsim;
using namespace warnsim::dissemination;

namespace {

bool close(double a, double b, double tol = 1e-12) { return std::abs(a - b) <= tol; }

ReceiveContext add_ctx(Protocol p) {
  ReceiveContext c;
  c.protocol = p;
  c.d_sender = 300.0;
  c.d_rint = 400.0;
  c.link = {1.0, 1.0, 0.0};
  c.fresh_neighbors = 0;
  return c;
}

}  // namespace

TEST_SUITE("dissemination") {
  TEST_CASE("distance factor closed form") {
    CHECK(close(distance_factor(150, 400, 300), 0.5));
    CHECK(close(distance_factor(120, 0, 300), 1.0));
    CHECK(close(distance_factor(300, 400, 300), 1.0));
    CHECK(close(distance_factor(10, 300, 300), 1.0 - 300.0 / 301.0));
    CHECK(close(distance_factor(10, 300, 300), 0.0033222591362126));
    CHECK_THROWS_AS(distance_factor(300.1, 10, 300), std::invalid_argument);
    CHECK_THROWS_AS(distance_factor(-1, 10, 300), std::invalid_argument);
  }

  TEST_CASE("utility closed form") {
    CHECK(close(utility({1, 1, 6, 4}), 1.0));
    CHECK(close(utility({0, 0, 6, 4}) / 1e10, 1.0));
    CHECK(close(utility({0.5, 0.5, 6, 4}) / 1e5, 1.0));
    CHECK(close(utility({0.3, 0.8, 6, 4}) / std::pow(10.0, 10.0 - (1.8 + 3.2)), 1.0));
    CHECK_THROWS_WITH(utility({0.5, 0.5, 7, 4}), "alpha1+alpha2 must equal 10");
  }

  TEST_CASE("volunteer's dilemma probability") {
    CHECK(vod_forward_probability(1.0, 5, 1.0) == 1.0);
    CHECK(vod_forward_probability(1e6, 1, 1.0) == 1.0);
    CHECK(close(vod_forward_probability(10.0, 2, 1.0), 0.1));
    CHECK(close(vod_forward_probability(10.0, 3, 1.0), 0.01));
    CHECK_THROWS(vod_forward_probability(10.0, 0, 1.0));
  }

  TEST_CASE("vod probability is monotone in df and in candidate count") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 20000; ++i) {
      const double lq = u(rng), df = u(rng), df2 = std::min(1.0, df + u(rng) * 0.2);
      const double k = std::pow(10.0, u(rng) * 8);
      const int n = 1 + static_cast<int>(rng() % 8);
      const double ua = utility({df, lq, 6, 4}), ub = utility({df2, lq, 6, 4});
      if (df2 > df) REQUIRE(ub < ua);
      REQUIRE(vod_forward_probability(ub, n, k) >= vod_forward_probability(ua, n, k));
      if (ua > k) REQUIRE(vod_forward_probability(ua, n + 1, k) <= vod_forward_probability(ua, n, k));
    }
  }

  TEST_CASE("vod Monte Carlo matches the analytic probability") {
    sim::RngStream rng(2024, sim::StreamId::GameDraw);
    for (const auto& [u, n] : std::vector<std::pair<double, int>>{{10.0, 2}, {3.0, 3}, {1.5, 4}}) {
      const double p = vod_forward_probability(u, n, 1.0);
      const int draws = 200000;
      int hits = 0;
      for (int i = 0; i < draws; ++i) hits += rng.bernoulli(p);
      const double sigma = std::sqrt(p * (1 - p) / draws);
      CHECK(std::abs(static_cast<double>(hits) / draws - p) <= 3 * sigma);
    }
  }

  TEST_CASE("availability closed form") {
    CHECK(availability(300, 300, 1.0) == 1.0);
    CHECK(availability(0, 300, 0.0) == 0.0);
    CHECK(close(availability(150, 300, 0.5), 0.5));
    CHECK_THROWS(availability(301, 300, 0.5));
  }

  TEST_CASE("forwarding game examples") {
    GameConfig cfg;
    auto r = forwarding_game_equilibrium(std::vector<double>{0.8}, cfg);
    CHECK(r.p == std::vector<double>{1.0});
    r = forwarding_game_equilibrium(std::vector<double>{0.2, 0.5, 0.4}, cfg);
    for (double p : r.p) CHECK(p == 0.0);
    r = forwarding_game_equilibrium(std::vector<double>{1.0, 1.0}, cfg);
    CHECK(close(r.p[0], 0.5, 1e-9));
    CHECK(close(r.p[1], 0.5, 1e-9));
    CHECK(r.converged);
  }

  TEST_CASE("two symmetric players: best-response enumeration on a 0.001 grid") {
    // At p_other = 0.5 every own probability on the grid earns the same payoff,
    // and any other p_other makes one pure strategy strictly better.
    const std::vector<double> a{1.0, 1.0};
    std::vector<double> prof{0.0, 0.5};
    double lo = INFINITY, hi = -INFINITY;
    for (int k = 0; k <= 1000; ++k) {
      prof[0] = k / 1000.0;
      const double v = testsupport::fg_payoff(a, prof, 0, 2.0, 1.0);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    CHECK(hi - lo <= 1e-12);
    prof[1] = 0.6;
    prof[0] = 0.0;
    const double silent = testsupport::fg_payoff(a, prof, 0, 2.0, 1.0);
    prof[0] = 1.0;
    CHECK(silent > testsupport::fg_payoff(a, prof, 0, 2.0, 1.0));
  }

  TEST_CASE("forwarding game equilibria are mutual best responses") {
    GameConfig cfg;
    for (const auto& a : testsupport::fg_fixtures(30)) {
      const auto r = forwarding_game_equilibrium(a, cfg);
      REQUIRE(r.p.size() == a.size());
      for (double p : r.p) REQUIRE((p >= 0.0 && p <= 1.0));
      REQUIRE(testsupport::max_deviation_gain(a, r.p, cfg.fg_benefit, cfg.fg_cost, 0.01) <= 1e-3);
      for (std::size_t i = 0; i < a.size(); ++i) {
        const double adv = forwarding_advantage(a, r.p, i, cfg);
        if (r.p[i] > 1e-9 && r.p[i] < 1 - 1e-9) REQUIRE(std::abs(adv) <= 1e-6);
      }
    }
  }

  TEST_CASE("game config validation") {
    GameConfig c;
    c.fg_cost = 3.0;
    CHECK_THROWS(c.validate());
    c = {};
    c.cost_k = 0;
    CHECK_THROWS(c.validate());
  }

  TEST_CASE("retransmission timers") {
    TimerConfig t;
    t.scheme = TimerScheme::SpeedAdaptive;
    t.t_min = 1;
    t.t_max = 5;
    CHECK(retransmission_delay(t, 13.89, 13.89, false) == 1.0);
    CHECK(retransmission_delay(t, 0, 13.89, false) == 5.0);
    CHECK(retransmission_delay(t, 6.945, 13.89, false) == doctest::Approx(3.0));
    t.scheme = TimerScheme::Fixed;
    t.t_fixed = 2;
    CHECK(retransmission_delay(t, 0, 13.89, true) == 2.0);
    CHECK(retransmission_delay(t, 10, 13.89, false) == 2.0);
    CHECK_THROWS(retransmission_delay(t, 20, 13.89, false));
    t.scheme = TimerScheme::MapPolling;
    t.poll = 0.1;
    CHECK(map_polling_delay(t, [](double x) { return x > 0.75; }) == doctest::Approx(0.8));
    CHECK(map_polling_delay(t, [](double) { return false; }) == 5.0);
    CHECK(parse_timer_scheme("speed") == TimerScheme::SpeedAdaptive);
    CHECK_THROWS(parse_timer_scheme("warp"));
  }

  TEST_CASE("receive dispatch") {
    sim::RngStream rng(1, sim::StreamId::GameDraw);
    auto c = add_ctx(Protocol::AddVod);
    c.duplicate = true;
    CHECK(on_receive_warning(c, rng).action == Action::Suppress);

    c = add_ctx(Protocol::AddVod);
    c.fresh_neighbors = 0;
    CHECK(on_receive_warning(c, rng).action == Action::StoreCarry);

    c.fresh_neighbors = 3;
    c.d_rint = 0.0;  // df = 1, lqf = 1, u = 1
    const auto d = on_receive_warning(c, rng);
    CHECK(d.p_forward == 1.0);
    CHECK(d.action == Action::ForwardNow);

    c = add_ctx(Protocol::Nsf);
    CHECK(on_receive_warning(c, rng).action == Action::StoreCarry);

    c = add_ctx(Protocol::FloodingDistance);
    c.d_threshold = 240;
    c.d_sender = 250;
    CHECK(on_receive_warning(c, rng).action == Action::ForwardNow);
    c.d_sender = 200;
    CHECK(on_receive_warning(c, rng).action == Action::Suppress);
    c.d_sender = 250;
    c.timer = TimerScheme::Fixed;
    CHECK(on_receive_warning(c, rng).action == Action::ScheduleTimer);

    c = add_ctx(Protocol::Njl);
    c.closest_to_intersection = true;
    CHECK(on_receive_warning(c, rng).action == Action::ForwardNow);
    c.closest_to_intersection = false;
    CHECK(on_receive_warning(c, rng).action == Action::Suppress);

    c = add_ctx(Protocol::Jsf);
    c.at_intersection = true;
    CHECK(on_receive_warning(c, rng).action == Action::ForwardNow);

    c = add_ctx(Protocol::AddFg);
    c.fresh_neighbors = 1;
    c.avail_self = 0.3;  // benefit*a <= cost: never forwards
    const std::vector<double> others{0.9};
    c.avail_others = others;
    CHECK(on_receive_warning(c, rng).action == Action::Suppress);

    c = add_ctx(Protocol::Gpsr);
    CHECK_THROWS(on_receive_warning(c, rng));
  }

  TEST_CASE("synthetic frames match the bitrate and GOP") {
    const auto f = synthetic_frames(150e3, 25, 4.8);  // ten whole GOPs
    REQUIRE(f.size() == 120);
    std::uint64_t bytes = 0;
    for (const auto& fr : f) bytes += fr.size_bytes;
    CHECK(static_cast<double>(bytes) * 8 / 4.8 == doctest::Approx(150e3).epsilon(0.01));
    CHECK(f[0].type == FrameType::I);
    CHECK(f[1].type == FrameType::B);
    CHECK(f[3].type == FrameType::P);
    CHECK(f[0].size_bytes == doctest::Approx(5.0 * f[1].size_bytes).epsilon(0.01));
    CHECK(packet_count(2500, 1000) == 3);
    CHECK(packet_count(1000, 1000) == 1);
  }

  TEST_CASE("frame trace round trip and errors") {
    const auto f = synthetic_frames(150e3, 25, 1);
    std::stringstream ss;
    write_frame_trace(ss, f);
    const auto back = read_frame_trace(ss);
    REQUIRE(back.size() == f.size());
    CHECK(back[5].size_bytes == f[5].size_bytes);
    std::stringstream bad("frame_index,frame_type,size_bytes\n0,X,100\n");
    CHECK_THROWS(read_frame_trace(bad));
    std::stringstream empty("");
    CHECK_THROWS(read_frame_trace(empty));
  }
}
