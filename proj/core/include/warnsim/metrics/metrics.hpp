#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace warnsim::metrics {

inline constexpr std::size_t kFrameTypes = 3;  // I, P, B

struct RingCounters {
  std::uint64_t frames_sent = 0;
  std::uint64_t frames_delivered = 0;
  std::uint64_t packets_sent = 0;
  std::uint64_t packets_delivered = 0;
  double delay_sum = 0.0;
  std::uint64_t delay_count = 0;
  std::array<std::uint64_t, kFrameTypes> frames_sent_by_type{};
  std::array<std::uint64_t, kFrameTypes> frames_delivered_by_type{};
};

/// Per-run measurement store. Rings are keyed by their upper bound in meters;
/// ring i covers (bound[i-1], bound[i]].
class MetricsLedger {
 public:
  explicit MetricsLedger(std::vector<double> ring_bounds = {300.0, 600.0, 1200.0, 1500.0});

  std::span<const double> ring_bounds() const { return bounds_; }
  std::size_t ring_count() const { return bounds_.size(); }
  /// Ring holding `distance`, or nullopt beyond the outermost bound.
  std::optional<std::size_t> ring_of(double distance) const;

  const RingCounters& ring(std::size_t i) const { return rings_.at(i); }
  /// Global counters (unicast end-to-end traffic and ring-independent totals).
  const RingCounters& total() const { return total_; }

  /// One frame expected at a receiver in ring i; delivered only if every packet arrived.
  void record_frame(std::size_t ring, std::size_t frame_type, bool delivered);
  void record_packet_sent(std::optional<std::size_t> ring);
  void record_packet_delivered(std::optional<std::size_t> ring, double delay);

  void record_duplicate(double t);
  void record_message(const std::string& kind, std::uint64_t n = 1) { messages_[kind] += n; }
  void record_scf_store() { ++scf_stores_; }
  void record_drop(const std::string& reason) { drops_[reason] += 1; }

  void set_channel_totals(std::uint64_t receivable, std::uint64_t delivered,
                          std::uint64_t lost_collision, std::uint64_t lost_link,
                          std::uint64_t collision_events);

  std::uint64_t duplicates() const { return duplicate_times_.size(); }
  /// Cumulative duplicates at t = bin, 2*bin, ... up to `until`.
  std::vector<std::uint64_t> duplicates_series(double bin, double until) const;
  const std::map<std::string, std::uint64_t>& messages_by_kind() const { return messages_; }
  std::uint64_t messages(const std::string& kind) const;
  std::uint64_t total_messages() const;
  const std::map<std::string, std::uint64_t>& drops() const { return drops_; }
  std::uint64_t scf_stores() const { return scf_stores_; }

  std::uint64_t receivable() const { return receivable_; }
  std::uint64_t delivered() const { return delivered_; }
  std::uint64_t lost_collision() const { return lost_collision_; }
  std::uint64_t lost_link() const { return lost_link_; }
  std::uint64_t collisions() const { return collision_events_; }
  /// delivered + lost_collision + lost_link == receivable.
  bool conserved() const { return delivered_ + lost_collision_ + lost_link_ == receivable_; }

 private:
  std::vector<double> bounds_;
  std::vector<RingCounters> rings_;
  RingCounters total_;
  std::vector<double> duplicate_times_;
  std::map<std::string, std::uint64_t> messages_;
  std::map<std::string, std::uint64_t> drops_;
  std::uint64_t scf_stores_ = 0;
  std::uint64_t receivable_ = 0, delivered_ = 0, lost_collision_ = 0, lost_link_ = 0;
  std::uint64_t collision_events_ = 0;
};

/// frames_delivered / frames_sent; nullopt when nothing was sent.
std::optional<double> fdr(const RingCounters& c);
std::optional<double> fdr(const MetricsLedger& ledger, std::size_t ring);
/// FDR restricted to one frame type (0 = I, 1 = P, 2 = B).
std::optional<double> fdr_by_type(const RingCounters& c, std::size_t frame_type);
std::optional<double> packet_delivery_ratio(const RingCounters& c);
/// delay_sum / delay_count; nullopt without deliveries.
std::optional<double> mean_delay(const RingCounters& c);
std::optional<double> mean_delay(const MetricsLedger& ledger, std::size_t ring);

struct CiSummary {
  double mean = 0.0;
  double half_width = 0.0;
  double level = 0.95;
  std::size_t n_runs = 0;
};

/// Student-t interval on the mean. Throws std::invalid_argument for n < 2 or a
/// level outside (0, 1).
CiSummary ci(std::span<const double> values, double level);

}  // namespace warnsim::metrics
