#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>

#include "warnsim/metrics/metrics.hpp"

namespace warnsim::metrics {

MetricsLedger::MetricsLedger(std::vector<double> ring_bounds) : bounds_(std::move(ring_bounds)) {
  if (bounds_.empty()) throw std::invalid_argument("rings must not be empty");
  for (std::size_t i = 0; i < bounds_.size(); ++i) {
    if (!(bounds_[i] > 0.0) || (i > 0 && !(bounds_[i] > bounds_[i - 1]))) {
      throw std::invalid_argument("rings must be positive and strictly increasing");
    }
  }
  rings_.resize(bounds_.size());
}

std::optional<std::size_t> MetricsLedger::ring_of(double distance) const {
  auto it = std::lower_bound(bounds_.begin(), bounds_.end(), distance);
  if (it == bounds_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - bounds_.begin());
}

void MetricsLedger::record_frame(std::size_t ring, std::size_t frame_type, bool delivered) {
  auto& r = rings_.at(ring);
  if (frame_type >= kFrameTypes) throw std::out_of_range("frame type");
  ++r.frames_sent;
  ++r.frames_sent_by_type[frame_type];
  ++total_.frames_sent;
  ++total_.frames_sent_by_type[frame_type];
  if (delivered) {
    ++r.frames_delivered;
    ++r.frames_delivered_by_type[frame_type];
    ++total_.frames_delivered;
    ++total_.frames_delivered_by_type[frame_type];
  }
}

void MetricsLedger::record_packet_sent(std::optional<std::size_t> ring) {
  if (ring) ++rings_.at(*ring).packets_sent;
  ++total_.packets_sent;
}

void MetricsLedger::record_packet_delivered(std::optional<std::size_t> ring, double delay) {
  if (ring) {
    auto& r = rings_.at(*ring);
    ++r.packets_delivered;
    r.delay_sum += delay;
    ++r.delay_count;
  }
  ++total_.packets_delivered;
  total_.delay_sum += delay;
  ++total_.delay_count;
}

void MetricsLedger::record_duplicate(double t) {
  // Events arrive in clock order, so the vector stays sorted.
  duplicate_times_.push_back(t);
}

void MetricsLedger::set_channel_totals(std::uint64_t receivable, std::uint64_t delivered,
                                       std::uint64_t lost_collision, std::uint64_t lost_link,
                                       std::uint64_t collision_events) {
  receivable_ = receivable;
  delivered_ = delivered;
  lost_collision_ = lost_collision;
  lost_link_ = lost_link;
  collision_events_ = collision_events;
}

std::vector<std::uint64_t> MetricsLedger::duplicates_series(double bin, double until) const {
  if (!(bin > 0.0)) throw std::invalid_argument("bin must be positive");
  std::vector<std::uint64_t> out;
  for (int k = 1;; ++k) {
    const double t = bin * k;
    if (t > until + 1e-9) break;
    const auto n = std::upper_bound(duplicate_times_.begin(), duplicate_times_.end(), t) -
                   duplicate_times_.begin();
    out.push_back(static_cast<std::uint64_t>(n));
  }
  return out;
}

std::uint64_t MetricsLedger::messages(const std::string& kind) const {
  auto it = messages_.find(kind);
  return it == messages_.end() ? 0 : it->second;
}

std::uint64_t MetricsLedger::total_messages() const {
  std::uint64_t n = 0;
  for (const auto& [k, v] : messages_) n += v;
  return n;
}

std::optional<double> fdr(const RingCounters& c) {
  if (c.frames_sent == 0) return std::nullopt;
  return static_cast<double>(c.frames_delivered) / static_cast<double>(c.frames_sent);
}

std::optional<double> fdr(const MetricsLedger& ledger, std::size_t ring) {
  return fdr(ledger.ring(ring));
}

std::optional<double> fdr_by_type(const RingCounters& c, std::size_t frame_type) {
  if (frame_type >= kFrameTypes) throw std::out_of_range("frame type");
  if (c.frames_sent_by_type[frame_type] == 0) return std::nullopt;
  return static_cast<double>(c.frames_delivered_by_type[frame_type]) /
         static_cast<double>(c.frames_sent_by_type[frame_type]);
}

std::optional<double> packet_delivery_ratio(const RingCounters& c) {
  if (c.packets_sent == 0) return std::nullopt;
  return static_cast<double>(c.packets_delivered) / static_cast<double>(c.packets_sent);
}

std::optional<double> mean_delay(const RingCounters& c) {
  if (c.delay_count == 0) return std::nullopt;
  return c.delay_sum / static_cast<double>(c.delay_count);
}

std::optional<double> mean_delay(const MetricsLedger& ledger, std::size_t ring) {
  return mean_delay(ledger.ring(ring));
}

CiSummary ci(std::span<const double> values, double level) {
  if (values.size() < 2) throw std::invalid_argument("ci needs at least 2 values");
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("ci level must lie in (0, 1)");
  const double n = static_cast<double>(values.size());
  // Shifted by the first value so identical samples give exactly zero spread.
  const double ref = values.front();
  double sum = 0.0;
  for (double v : values) sum += v - ref;
  const double shift = sum / n;
  double ss = 0.0;
  for (double v : values) ss += (v - ref - shift) * (v - ref - shift);
  const double mean = ref + shift;
  const double s = std::sqrt(ss / (n - 1.0));
  boost::math::students_t dist(n - 1.0);
  const double t = boost::math::quantile(boost::math::complement(dist, (1.0 - level) / 2.0));
  return {mean, t * s / std::sqrt(n), level, values.size()};
}

}  // namespace warnsim::metrics
