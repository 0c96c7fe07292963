#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "warnsim/scenario/config.hpp"
#include "warnsim/scenario/report.hpp"
#include "warnsim/scenario/run.hpp"

using namespace warnsim;
using namespace warnsim::scenario;
namespace fs = std::filesystem;

namespace {

ScenarioConfig parse_or_die(const std::string& text) {
  auto r = parse_config_text(text);
  for (const auto& e : r.errors) INFO(e);
  REQUIRE(r.ok());
  return r.config;
}

const std::string kDissemination = R"({
  "name": "prop-dissemination",
  "area": {"width": 1000, "height": 1000, "block_size": 250},
  "densities": [40],
  "protocols": ["add-vod", "add-fg", "flooding-distance", "jsf", "nsf", "njl"],
  "duration": 20, "seeds": [1, 2],
  "rings": [300, 600],
  "radio": {"r_max": 300, "per_link_loss": 0.05, "obstacle_blocking": true},
  "mobility": {"obstacles": true},
  "game": {"cost_k": 100000},
  "dissemination": {"lifetime": 15},
  "warning": {"start_time": 2, "video_seconds": 1}
})";

const std::string kTimers = R"({
  "name": "prop-timers",
  "area": {"width": 1000, "height": 1000, "block_size": 250},
  "densities": [25],
  "protocols": ["flooding-distance"],
  "duration": 20, "seeds": [3, 4],
  "dissemination": {"d_threshold_fraction": 0.5, "lifetime": 15},
  "mobility": {"obstacles": true}, "radio": {"obstacle_blocking": true},
  "timers": [{"name": "fixed", "scheme": "fixed", "t_fixed": 1},
             {"name": "speed", "scheme": "speed", "t_min": 1, "t_max": 5},
             {"name": "map", "scheme": "map", "poll": 0.1, "t_max": 5}],
  "warning": {"start_time": 2, "frames": 1}
})";

const std::string kUnicast = R"({
  "name": "prop-unicast",
  "area": {"width": 1000, "height": 600, "block_size": 100},
  "densities": [80],
  "protocols": ["gpsr", "3mrp", "3mrp-dsw"],
  "duration": 15, "seeds": [1, 2],
  "radio": {"r_max": 250, "per_link_loss": 0.05},
  "routing": {"sources": 3, "start_time": 3, "stop_time": 12, "ttl": 16,
              "rsus": [[100, 300], [900, 300]]}
})";

const std::string kCtd = R"({
  "name": "prop-ctd",
  "area": {"width": 300, "height": 300, "block_size": 100},
  "pedestrian_counts": [200],
  "protocols": ["ctd-query", "ctd-passive", "none-assessment"],
  "duration": 15, "seeds": [1, 2],
  "radio": {"r_max": 50},
  "beacon": {"enabled": false},
  "ctd": {"p_a": [0.0, 0.3, 1.0], "alert_senders": [1, 3], "alert_time": 3}
})";

void check_invariants(const RunResult& r) {
  INFO(to_string(r.spec.protocol), " ", r.spec.variant, " seed ", r.spec.seed);
  CHECK(r.ledger.conserved());
  CHECK(r.ledger.receivable() > 0);
  CHECK(r.props.forwards_without_receipt == 0);
  CHECK(r.props.ttl_violations == 0);
  CHECK(r.props.weight_violations == 0);
  CHECK(r.props.clock_monotone);
  CHECK(r.props.max_relays_per_message <= 1);
  for (std::size_t i = 0; i < r.ledger.ring_count(); ++i) {
    const auto& c = r.ledger.ring(i);
    CHECK(c.frames_delivered <= c.frames_sent);
    CHECK(c.packets_delivered <= c.packets_sent);
    CHECK(c.delay_count == c.packets_delivered);
  }
  const auto dup = r.ledger.duplicates_series(1.0, 20.0);
  for (std::size_t i = 1; i < dup.size(); ++i) CHECK(dup[i - 1] <= dup[i]);
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("warnsim-prop-" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_SUITE("properties") {
  TEST_CASE("dissemination runs keep every invariant") {
    const auto cfg = parse_or_die(kDissemination);
    const auto runs = run_sweep(cfg, expand_runs(cfg), 1);
    for (const auto& r : runs) {
      check_invariants(r);
      CHECK(r.props.forwards > 0);
      CHECK(r.props.ttl_hops > 0);
    }
  }

  TEST_CASE("timer runs keep every invariant") {
    const auto cfg = parse_or_die(kTimers);
    for (const auto& r : run_sweep(cfg, expand_runs(cfg), 1)) check_invariants(r);
  }

  TEST_CASE("unicast runs keep every invariant and weights stay valid") {
    const auto cfg = parse_or_die(kUnicast);
    for (const auto& r : run_sweep(cfg, expand_runs(cfg), 1)) {
      check_invariants(r);
      CHECK(r.props.ttl_hops > 0);
      if (r.spec.protocol == Protocol::Mrp3Dsw) CHECK(r.props.weight_updates > 0);
    }
  }

  TEST_CASE("ctd runs keep every invariant; passive never replies") {
    const auto cfg = parse_or_die(kCtd);
    for (const auto& r : run_sweep(cfg, expand_runs(cfg), 1)) {
      check_invariants(r);
      if (r.spec.protocol == Protocol::CtdPassive) {
        CHECK(r.props.reply_messages == 0);
        CHECK(r.ledger.messages("reply") == 0);
      }
      if (r.spec.protocol == Protocol::CtdQuery && r.spec.p_a == 1.0) {
        CHECK(r.ledger.messages("alert") == 0);
      }
    }
  }

  TEST_CASE("same seed gives byte-identical reports") {
    for (const auto* text : {&kDissemination, &kUnicast, &kCtd, &kTimers}) {
      const auto cfg = parse_or_die(*text);
      const auto specs = expand_runs(cfg);
      const auto a = run_sweep(cfg, specs, 1);
      const auto b = run_sweep(cfg, specs, 1);
      for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].digest == b[i].digest);
        CHECK(a[i].values == b[i].values);
      }
      const auto da = scratch(cfg.name + "-a"), db = scratch(cfg.name + "-b");
      const auto fa = write_reports(cfg, a, da);
      const auto fb = write_reports(cfg, b, db);
      REQUIRE(fa.size() == fb.size());
      for (std::size_t i = 0; i < fa.size(); ++i) {
        INFO(fa[i].string());
        CHECK(slurp(fa[i]) == slurp(fb[i]));
        CHECK_FALSE(slurp(fa[i]).empty());
      }
      fs::remove_all(da);
      fs::remove_all(db);
    }
  }

  TEST_CASE("parallel sweep equals sequential sweep") {
    const auto cfg = parse_or_die(kDissemination);
    const auto specs = expand_runs(cfg);
    const auto seq = run_sweep(cfg, specs, 1);
    const auto par = run_sweep(cfg, specs, 4);
    const auto ra = aggregate(cfg, seq), rb = aggregate(cfg, par);
    CHECK(summary_json(cfg, seq, ra) == summary_json(cfg, par, rb));
    CHECK(table_csv(ra) == table_csv(rb));
  }

  TEST_CASE("different seeds give different traces") {
    const auto cfg = parse_or_die(kUnicast);
    const auto specs = expand_runs(cfg);
    const auto runs = run_sweep(cfg, specs, 1);
    CHECK_FALSE(runs[0].digest == runs[1].digest);
  }

  TEST_CASE("mean flooding FDR does not grow with distance on an open grid") {
    const auto cfg = parse_or_die(R"({
      "name": "prop-rings",
      "area": {"width": 1500, "height": 1500, "block_size": 250},
      "densities": [100], "protocols": ["flooding-distance"],
      "duration": 15, "seeds": "1-10",
      "rings": [300, 600, 1200],
      "radio": {"r_max": 300, "per_link_loss": 0.0},
      "warning": {"start_time": 2, "frames": 5}
    })");
    const auto runs = run_sweep(cfg, expand_runs(cfg), 1);
    const auto rows = aggregate(cfg, runs);
    double prev = 1.0;
    for (const char* ring : {"300", "600", "1200"}) {
      const auto* r = find_row(rows, "flooding-distance", "default", 100, ring, "fdr");
      REQUIRE(r != nullptr);
      INFO("ring ", ring);
      CHECK(r->ci.mean <= prev);
      prev = r->ci.mean;
    }
  }
}
