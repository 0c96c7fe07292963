#include <cmath>
#include <stdexcept>

#include "warnsim/ctd/ctd.hpp"

namespace warnsim::ctd {

std::string_view to_string(EventType t) {
  switch (t) {
    case EventType::Accident: return "accident";
    case EventType::Fire: return "fire";
    case EventType::Flood: return "flood";
    case EventType::Crowd: return "crowd";
    case EventType::Other: return "other";
  }
  return "?";
}

std::string_view to_string(PassiveAction a) {
  switch (a) {
    case PassiveAction::Rebroadcast: return "rebroadcast";
    case PassiveAction::Store: return "store";
    case PassiveAction::Suppress: return "suppress";
  }
  return "?";
}

void CtdConfig::validate() const {
  if (!(reply_window > 0.0)) throw std::invalid_argument("ctd.reply_window must be positive");
  if (!(p_a >= 0.0 && p_a <= 1.0)) throw std::invalid_argument("ctd.p_a must lie in [0, 1]");
  if (!(majority_threshold >= 0.0 && majority_threshold < 1.0)) {
    throw std::invalid_argument("ctd.majority_threshold must lie in [0, 1)");
  }
  if (!(dup_radius >= 0.0) || !(dup_window >= 0.0)) {
    throw std::invalid_argument("ctd.dup_radius and ctd.dup_window must be non-negative");
  }
}

bool alert_similarity(const Alert& a, const Alert& b, const CtdConfig& cfg) {
  return a.event_type == b.event_type && distance(a.origin, b.origin) <= cfg.dup_radius &&
         std::abs(a.created - b.created) <= cfg.dup_window;
}

bool assess(const CtdConfig& cfg, sim::RngStream& assessment_rng) {
  return !assessment_rng.bernoulli(cfg.p_a);
}

QueryOutcome ctd_query_decide(int confirms, int replies, const CtdConfig& cfg) {
  if (confirms < 0 || replies < 0 || confirms > replies) {
    throw std::invalid_argument("ctd_query_decide: need 0 <= confirms <= replies");
  }
  if (replies == 0) return QueryOutcome::Discard;
  const double share = static_cast<double>(confirms) / static_cast<double>(replies);
  return share > cfg.majority_threshold ? QueryOutcome::Broadcast : QueryOutcome::Discard;
}

bool AlertStore::seen_similar(const Alert& a, const CtdConfig& cfg) const {
  for (const auto& s : seen_) {
    if (alert_similarity(s, a, cfg)) return true;
  }
  return false;
}

PassiveAction ctd_passive_process(AlertStore& store, const Alert& incoming, const CtdConfig& cfg,
                                  sim::RngStream& assessment_rng) {
  if (store.seen_similar(incoming, cfg)) return PassiveAction::Suppress;
  store.remember(incoming);
  return assess(cfg, assessment_rng) ? PassiveAction::Rebroadcast : PassiveAction::Store;
}

}  // namespace warnsim::ctd
