#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "warnsim/roadnet/geometry.hpp"
#include "warnsim/sim/rng.hpp"

namespace warnsim::ctd {

enum class EventType : std::uint8_t { Accident, Fire, Flood, Crowd, Other };

std::string_view to_string(EventType t);

struct Alert {
  std::uint64_t id = 0;  // unique per proposer
  EventType event_type = EventType::Accident;
  Point origin;
  double created = 0.0;  // s
  NodeId proposer = kNoNode;
};

struct CtdConfig {
  double reply_window = 2.0;        // s
  double majority_threshold = 0.5;  // confirms / replies must exceed this
  double p_a = 0.1;                 // probability a node refuses the alert
  double dup_radius = 100.0;        // m
  double dup_window = 60.0;         // s

  void validate() const;
};

/// Same event type, origins within dup_radius and creation times within dup_window.
bool alert_similarity(const Alert& a, const Alert& b, const CtdConfig& cfg);

/// A neighbor's assessment of a query: confirm with probability 1 - p_a.
bool assess(const CtdConfig& cfg, sim::RngStream& assessment_rng);

enum class QueryOutcome { Broadcast, Discard };

/// Decision at the close of the reply window. Zero replies discard.
QueryOutcome ctd_query_decide(int confirms, int replies, const CtdConfig& cfg);

/// Alerts a node has seen, for similarity-based duplicate suppression.
class AlertStore {
 public:
  bool seen_similar(const Alert& a, const CtdConfig& cfg) const;
  void remember(const Alert& a) { seen_.push_back(a); }
  std::size_t size() const { return seen_.size(); }

 private:
  std::vector<Alert> seen_;
};

enum class PassiveAction { Rebroadcast, Store, Suppress };

std::string_view to_string(PassiveAction a);

/// Proactive local comparison: similar alert already seen suppresses; otherwise
/// the alert is remembered and accepted (rebroadcast once) with probability 1 - p_a.
PassiveAction ctd_passive_process(AlertStore& store, const Alert& incoming, const CtdConfig& cfg,
                                  sim::RngStream& assessment_rng);

}  // namespace warnsim::ctd
