#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "warnsim/metrics/metrics.hpp"

using namespace warnsim::metrics;

TEST_SUITE("metrics") {
  TEST_CASE("rings use upper bounds") {
    MetricsLedger l;
    CHECK(l.ring_of(0.0) == 0u);
    CHECK(l.ring_of(300.0) == 0u);
    CHECK(l.ring_of(300.5) == 1u);
    CHECK(l.ring_of(1500.0) == 3u);
    CHECK_FALSE(l.ring_of(1500.1).has_value());
  }

  TEST_CASE("frame delivery ratio") {
    MetricsLedger l;
    for (int i = 0; i < 100; ++i) l.record_frame(1, 0, i < 97);
    CHECK(*fdr(l, 1) == doctest::Approx(0.97));
    CHECK_FALSE(fdr(l, 0).has_value());
    MetricsLedger z;
    z.record_frame(0, 2, false);
    CHECK(*fdr(z, 0) == 0.0);
    z.record_frame(2, 1, true);
    CHECK(*fdr(z, 2) == 1.0);
    CHECK(*fdr_by_type(z.ring(0), 2) == 0.0);
    CHECK_FALSE(fdr_by_type(z.ring(0), 0).has_value());
  }

  TEST_CASE("mean delay") {
    MetricsLedger l;
    for (double d : {1.0, 2.0, 3.0}) l.record_packet_delivered(0, d);
    CHECK(*mean_delay(l, 0) == 2.0);
    l.record_packet_delivered(1, 0.5);
    CHECK(*mean_delay(l, 1) == 0.5);
    CHECK_FALSE(mean_delay(l, 2).has_value());
    CHECK(l.ring(0).delay_count == l.ring(0).packets_delivered);
  }

  TEST_CASE("confidence interval") {
    const std::vector<double> same{0.4, 0.4, 0.4};
    CHECK(ci(same, 0.95).half_width == 0.0);
    const std::vector<double> two{0.0, 1.0};
    const auto c = ci(two, 0.95);
    CHECK(c.mean == 0.5);
    CHECK(c.half_width == doctest::Approx(12.7062047 * std::sqrt(0.5) / std::sqrt(2.0)).epsilon(1e-6));
    CHECK(c.half_width == doctest::Approx(6.3531).epsilon(1e-4));
    CHECK(c.n_runs == 2);
    const std::vector<double> one{1.0};
    CHECK_THROWS_AS(ci(one, 0.95), std::invalid_argument);
    CHECK_THROWS_AS(ci(two, 1.0), std::invalid_argument);
    // 90 % with ten runs: t = 1.833113
    std::vector<double> ten;
    for (int i = 0; i < 10; ++i) ten.push_back(i);
    double s = 0;
    for (double v : ten) s += (v - 4.5) * (v - 4.5);
    s = std::sqrt(s / 9);
    CHECK(ci(ten, 0.90).half_width == doctest::Approx(1.833113 * s / std::sqrt(10.0)).epsilon(1e-6));
  }

  TEST_CASE("duplicate series is cumulative and non-decreasing") {
    MetricsLedger l;
    for (double t : {0.2, 0.7, 1.5, 3.9, 3.95}) l.record_duplicate(t);
    const auto s = l.duplicates_series(1.0, 5.0);
    CHECK(s == std::vector<std::uint64_t>{2, 3, 3, 5, 5});
  }

  TEST_CASE("conservation identity") {
    MetricsLedger l;
    l.set_channel_totals(10, 6, 3, 1, 2);
    CHECK(l.conserved());
    l.set_channel_totals(10, 6, 3, 0, 2);
    CHECK_FALSE(l.conserved());
  }

  TEST_CASE("message totals") {
    MetricsLedger l;
    l.record_message("warning", 3);
    l.record_message("reply");
    CHECK(l.messages("warning") == 3);
    CHECK(l.messages("query") == 0);
    CHECK(l.total_messages() == 4);
  }
}
