#include "doctest.h"
#include "warnsim/ctd/ctd.hpp"

using namespace warnsim;
using namespace warnsim::ctd;

namespace {
Alert alert(std::uint64_t id, EventType t, Point p, double at) { return {id, t, p, at, 0}; }
}  // namespace

TEST_SUITE("ctd") {
  TEST_CASE("alert similarity") {
    CtdConfig c;
    const auto a = alert(1, EventType::Accident, {0, 0}, 0);
    CHECK(alert_similarity(a, alert(2, EventType::Accident, {50, 0}, 10), c));
    CHECK_FALSE(alert_similarity(a, alert(2, EventType::Fire, {50, 0}, 10), c));
    CHECK_FALSE(alert_similarity(a, alert(2, EventType::Accident, {150, 0}, 10), c));
    CHECK_FALSE(alert_similarity(a, alert(2, EventType::Accident, {50, 0}, 61), c));
  }

  TEST_CASE("query majority rule") {
    CtdConfig c;
    CHECK(ctd_query_decide(4, 5, c) == QueryOutcome::Broadcast);
    CHECK(ctd_query_decide(2, 4, c) == QueryOutcome::Discard);
    CHECK(ctd_query_decide(0, 0, c) == QueryOutcome::Discard);
  }

  TEST_CASE("assessment extremes") {
    sim::RngStream rng(5, sim::StreamId::Assessment);
    CtdConfig c;
    c.p_a = 0.0;
    for (int i = 0; i < 1000; ++i) REQUIRE(assess(c, rng));
    c.p_a = 1.0;
    for (int i = 0; i < 1000; ++i) REQUIRE_FALSE(assess(c, rng));
  }

  TEST_CASE("query with p_a = 0 always broadcasts, p_a = 1 never") {
    sim::RngStream rng(6, sim::StreamId::Assessment);
    for (double pa : {0.0, 1.0}) {
      CtdConfig c;
      c.p_a = pa;
      for (int replies = 1; replies <= 20; ++replies) {
        int confirms = 0;
        for (int k = 0; k < replies; ++k) confirms += assess(c, rng);
        const auto o = ctd_query_decide(confirms, replies, c);
        REQUIRE(o == (pa == 0.0 ? QueryOutcome::Broadcast : QueryOutcome::Discard));
      }
    }
  }

  TEST_CASE("passive processing") {
    sim::RngStream rng(7, sim::StreamId::Assessment);
    CtdConfig c;
    c.p_a = 0.0;
    AlertStore s;
    const auto a = alert(1, EventType::Flood, {0, 0}, 0);
    CHECK(ctd_passive_process(s, a, c, rng) == PassiveAction::Rebroadcast);
    CHECK(ctd_passive_process(s, alert(2, EventType::Flood, {20, 0}, 1), c, rng) ==
          PassiveAction::Suppress);
    c.p_a = 1.0;
    AlertStore s2;
    CHECK(ctd_passive_process(s2, a, c, rng) == PassiveAction::Store);
    CHECK(s2.size() == 1);
    CHECK(ctd_passive_process(s2, a, c, rng) == PassiveAction::Suppress);
  }

  TEST_CASE("config validation") {
    CtdConfig c;
    c.p_a = 1.5;
    CHECK_THROWS(c.validate());
    c = {};
    c.reply_window = 0;
    CHECK_THROWS(c.validate());
  }
}
