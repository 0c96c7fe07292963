#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "warnsim/radio/channel.hpp"
#include "warnsim/radio/radio.hpp"

namespace warnsim::radio {

void RadioConfig::validate() const {
  if (!(r_max > 0.0)) throw std::invalid_argument("radio.r_max must be positive");
  if (!(bitrate > 0.0)) throw std::invalid_argument("radio.bitrate must be positive");
  if (!(per_link_loss >= 0.0 && per_link_loss <= 1.0)) {
    throw std::invalid_argument("radio.per_link_loss must lie in [0, 1]");
  }
  if (!(slot > 0.0)) throw std::invalid_argument("radio.slot must be positive");
}

bool in_range(Point a, Point b, const RadioConfig& cfg, const roadnet::RoadGraph* graph) {
  if (distance(a, b) > cfg.r_max) return false;
  if (cfg.obstacle_blocking && graph != nullptr && graph->blocked(a, b)) return false;
  return true;
}

namespace {

void require_unit(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw std::invalid_argument(std::string(name) + " must lie in [0, 1]");
  }
}

}  // namespace

double lqf(const LinkQualityInputs& in) {
  require_unit(in.signal, "signal");
  require_unit(in.channel, "channel");
  require_unit(in.collision_prob, "collision_prob");
  return (in.signal + in.channel + (1.0 - in.collision_prob)) / 3.0;
}

double abe_estimate(double busy_ratio, double bitrate) {
  require_unit(busy_ratio, "busy_ratio");
  return (1.0 - busy_ratio) * bitrate;
}

double atb_interval(double busy_ratio, double i_min, double i_max) {
  require_unit(busy_ratio, "busy_ratio");
  if (!(i_min > 0.0) || !(i_min <= i_max)) {
    throw std::invalid_argument("atb_interval needs 0 < i_min <= i_max");
  }
  return i_min + (i_max - i_min) * busy_ratio * busy_ratio;
}

// ---------------------------------------------------------------------------

void PositionIndex::rebuild(std::span<const Point> positions, std::span<const std::uint8_t> active) {
  buckets_.clear();
  bool any = false;
  double max_x = 0.0, max_y = 0.0;
  for (std::size_t i = 0; i < positions.size(); ++i) {
    if (!active[i]) continue;
    const Point p = positions[i];
    if (!any) {
      min_x_ = max_x = p.x;
      min_y_ = max_y = p.y;
      any = true;
    } else {
      min_x_ = std::min(min_x_, p.x);
      min_y_ = std::min(min_y_, p.y);
      max_x = std::max(max_x, p.x);
      max_y = std::max(max_y, p.y);
    }
  }
  if (!any) {
    cols_ = rows_ = 0;
    return;
  }
  cols_ = static_cast<int>((max_x - min_x_) / cell_) + 1;
  rows_ = static_cast<int>((max_y - min_y_) / cell_) + 1;
  buckets_.assign(static_cast<std::size_t>(cols_) * rows_, {});
  for (std::size_t i = 0; i < positions.size(); ++i) {
    if (!active[i]) continue;
    const int c = col(positions[i].x);
    const int r = row(positions[i].y);
    buckets_[static_cast<std::size_t>(r) * cols_ + c].push_back(static_cast<NodeId>(i));
  }
}

int PositionIndex::col(double x) const {
  return std::clamp(static_cast<int>(std::floor((x - min_x_) / cell_)), 0, cols_ - 1);
}

int PositionIndex::row(double y) const {
  return std::clamp(static_cast<int>(std::floor((y - min_y_) / cell_)), 0, rows_ - 1);
}

// ---------------------------------------------------------------------------

Channel::Channel(RadioConfig cfg, const roadnet::RoadGraph* graph, std::size_t node_count,
                 std::uint64_t seed)
    : cfg_(cfg),
      graph_(graph),
      loss_rng_(seed, sim::StreamId::RadioLoss),
      positions_(node_count),
      active_(node_count, 1),
      index_(cfg.r_max),
      tx_of_(node_count, 0),
      hearing_(node_count),
      busy_(node_count),
      marks_(node_count) {
  cfg_.validate();
  index_.rebuild(positions_, active_);
}

void Channel::set_positions(std::span<const Point> positions, std::span<const std::uint8_t> active) {
  if (positions.size() != positions_.size() || active.size() != active_.size()) {
    throw std::invalid_argument("position update does not match channel node count");
  }
  std::copy(positions.begin(), positions.end(), positions_.begin());
  std::copy(active.begin(), active.end(), active_.begin());
  index_.rebuild(positions_, active_);
}

bool Channel::reachable(NodeId a, NodeId b) const {
  return in_range(positions_[a], positions_[b], cfg_, graph_);
}

std::vector<NodeId> Channel::in_range_of(NodeId node) const {
  std::vector<NodeId> out;
  if (!active_[node]) return out;
  index_.for_each_candidate(positions_[node], cfg_.r_max, [&](NodeId id) {
    if (id != node && reachable(node, id)) out.push_back(id);
  });
  std::sort(out.begin(), out.end());
  return out;
}

void Channel::mark_busy(NodeId node, double start, double end) {
  auto& q = busy_[node];
  if (!q.empty() && start <= q.back().end) {
    q.back().end = std::max(q.back().end, end);
  } else {
    q.push_back({start, end});
  }
  while (q.size() > 1 && q.front().end < start - 30.0) q.pop_front();
}

void Channel::corrupt(TxId tx, NodeId receiver) {
  auto it = txs_.find(tx);
  if (it == txs_.end()) return;
  for (auto& slot : it->second.rx) {
    if (slot.receiver == receiver) {
      slot.corrupted = true;
      slot.collided = true;
      return;
    }
  }
}

TxId Channel::begin(NodeId sender, double t, std::uint32_t bytes) {
  if (sender >= positions_.size()) throw std::out_of_range("unknown sender");
  if (!active_[sender]) throw std::logic_error("inactive node cannot transmit");
  if (tx_of_[sender] != 0) {
    throw std::logic_error("node " + std::to_string(sender) + " is already transmitting");
  }
  if (bytes == 0) throw std::invalid_argument("transmission size must be positive");

  const TxId id = next_tx_++;
  Tx tx{sender, t, t + airtime(bytes, cfg_), {}};

  // Half duplex: whatever the sender was receiving is lost.
  if (!hearing_[sender].empty()) {
    ++counters_.collision_events;
    for (TxId other : hearing_[sender]) corrupt(other, sender);
  }
  tx_of_[sender] = id;
  mark_busy(sender, tx.start, tx.end);

  std::vector<NodeId> receivers = in_range_of(sender);
  tx.rx.reserve(receivers.size());
  for (NodeId r : receivers) {
    RxSlot slot{r, false, false};
    if (tx_of_[r] != 0) {
      slot.corrupted = slot.collided = true;
    }
    if (!hearing_[r].empty()) {
      ++counters_.collision_events;
      for (TxId other : hearing_[r]) corrupt(other, r);
      slot.corrupted = slot.collided = true;
    }
    hearing_[r].push_back(id);
    mark_busy(r, tx.start, tx.end);
    tx.rx.push_back(slot);
  }
  ++counters_.transmissions;
  txs_.emplace(id, std::move(tx));
  return id;
}

std::vector<Reception> Channel::end(TxId id) {
  auto it = txs_.find(id);
  if (it == txs_.end()) throw std::logic_error("unknown or already finished transmission");
  Tx tx = std::move(it->second);
  txs_.erase(it);
  tx_of_[tx.sender] = 0;
  // Counted on resolution, so frames still on air at the end of a run stay out.
  counters_.receivable += tx.rx.size();

  std::vector<Reception> out;
  out.reserve(tx.rx.size());
  for (const RxSlot& slot : tx.rx) {
    auto& h = hearing_[slot.receiver];
    h.erase(std::remove(h.begin(), h.end(), id), h.end());
    Reception rec{slot.receiver, tx.end, RxOutcome::Delivered};
    if (slot.corrupted) {
      rec.outcome = RxOutcome::Collision;
      ++counters_.lost_collision;
    } else if (loss_rng_.bernoulli(cfg_.per_link_loss)) {
      rec.outcome = RxOutcome::LinkLoss;
      ++counters_.lost_link;
    } else {
      ++counters_.delivered;
    }
    auto& m = marks_[slot.receiver];
    m.push_back({tx.end, slot.collided, rec.outcome != RxOutcome::Delivered});
    while (!m.empty() && m.front().time < tx.end - 30.0) m.pop_front();
    out.push_back(rec);
  }
  return out;
}

double Channel::end_time(TxId id) const {
  auto it = txs_.find(id);
  if (it == txs_.end()) throw std::logic_error("unknown transmission");
  return it->second.end;
}

NodeId Channel::sender_of(TxId id) const {
  auto it = txs_.find(id);
  if (it == txs_.end()) throw std::logic_error("unknown transmission");
  return it->second.sender;
}

bool Channel::sensing_busy(NodeId node, double t) const {
  if (tx_of_[node] != 0) return true;
  for (TxId id : hearing_[node]) {
    const Tx& tx = txs_.at(id);
    if (tx.start + cfg_.slot <= t) return true;
  }
  return false;
}

double Channel::idle_at(NodeId node, double t) const {
  double idle = t;
  if (tx_of_[node] != 0) idle = std::max(idle, txs_.at(tx_of_[node]).end);
  for (TxId id : hearing_[node]) idle = std::max(idle, txs_.at(id).end);
  return idle;
}

double Channel::busy_ratio(NodeId node, double now, double window) {
  auto& q = busy_[node];
  const double from = now - window;
  while (!q.empty() && q.front().end <= from) q.pop_front();
  double busy = 0.0;
  for (const auto& iv : q) {
    const double s = std::max(iv.start, from);
    const double e = std::min(iv.end, now);
    if (e > s) busy += e - s;
  }
  return std::clamp(busy / window, 0.0, 1.0);
}

double Channel::collision_fraction(NodeId node, double now, double window) {
  const auto& m = marks_[node];
  std::size_t total = 0, hit = 0;
  for (auto it = m.rbegin(); it != m.rend() && it->time >= now - window; ++it) {
    ++total;
    if (it->collided) ++hit;
  }
  return total == 0 ? 0.0 : static_cast<double>(hit) / static_cast<double>(total);
}

double Channel::loss_fraction(NodeId node, double now, double window) {
  const auto& m = marks_[node];
  std::size_t total = 0, hit = 0;
  for (auto it = m.rbegin(); it != m.rend() && it->time >= now - window; ++it) {
    ++total;
    if (it->lost) ++hit;
  }
  return total == 0 ? 0.0 : static_cast<double>(hit) / static_cast<double>(total);
}

}  // namespace warnsim::radio
