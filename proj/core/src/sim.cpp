#include "warnsim/sim/rng.hpp"
#include "warnsim/sim/simulator.hpp"

#include <bit>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace warnsim::sim {

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::TransmitStart: return "transmit-start";
    case EventKind::TransmitEnd: return "transmit-end";
    case EventKind::TimerExpiry: return "timer-expiry";
    case EventKind::Beacon: return "beacon";
    case EventKind::MobilityStep: return "mobility-step";
    case EventKind::MetricSnapshot: return "metric-snapshot";
  }
  return "unknown";
}

std::string_view to_string(StreamId id) {
  switch (id) {
    case StreamId::Mobility: return "mobility";
    case StreamId::RadioLoss: return "radio-loss";
    case StreamId::GameDraw: return "game-draw";
    case StreamId::Assessment: return "assessment";
    case StreamId::Mac: return "mac";
    case StreamId::Traffic: return "traffic";
  }
  return "unknown";
}

namespace {

void fnv_mix(std::uint64_t& h, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    h ^= (v >> (8 * i)) & 0xffu;
    h *= 1099511628211ull;
  }
}

}  // namespace

void TraceDigest::add(const SimEvent& ev) {
  fnv_mix(hash, std::bit_cast<std::uint64_t>(ev.fire_time));
  fnv_mix(hash, ev.sequence);
  fnv_mix(hash, (static_cast<std::uint64_t>(ev.target) << 8) | static_cast<std::uint64_t>(ev.kind));
  fnv_mix(hash, ev.token);
  ++events;
}

EventHandle Simulator::schedule(Seconds fire_time, EventKind kind, std::uint32_t target,
                                Handler handler, std::uint64_t token) {
  if (!(fire_time >= now_)) {
    std::ostringstream os;
    os << "cannot schedule " << to_string(kind) << " event at t=" << fire_time
       << " before current clock t=" << now_;
    throw std::logic_error(os.str());
  }
  const std::uint64_t seq = next_sequence_++;
  queue_.push(Entry{SimEvent{fire_time, seq, target, kind, token}, std::move(handler)});
  live_.insert(seq);
  return EventHandle(seq);
}

bool Simulator::cancel(const EventHandle& handle) {
  if (!handle.valid()) return false;
  if (live_.erase(handle.sequence()) == 0) return false;
  cancelled_.insert(handle.sequence());
  return true;
}

Seconds Simulator::run_until(Seconds t_end) {
  if (t_end < now_) {
    std::ostringstream os;
    os << "run_until(" << t_end << ") is before current clock t=" << now_;
    throw std::logic_error(os.str());
  }
  while (!queue_.empty() && queue_.top().event.fire_time <= t_end) {
    // priority_queue::top is const; the entry is discarded right after.
    Entry entry = std::move(const_cast<Entry&>(queue_.top()));
    queue_.pop();
    if (cancelled_.erase(entry.event.sequence) > 0) continue;
    live_.erase(entry.event.sequence);
    now_ = entry.event.fire_time;
    digest_.add(entry.event);
    if (record_) trace_.push_back(entry.event);
    try {
      if (entry.handler) entry.handler(entry.event);
    } catch (const std::exception& e) {
      std::ostringstream os;
      os << "event handler failed at t=" << entry.event.fire_time << " (seq "
         << entry.event.sequence << ", " << to_string(entry.event.kind) << ", target "
         << entry.event.target << "): " << e.what();
      throw std::runtime_error(os.str());
    }
  }
  now_ = t_end;
  return now_;
}

RngStream::RngStream(std::uint64_t seed, StreamId stream) : seed_(seed), stream_(stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), 0x5eedu};
  engine_.seed(seq);
}

std::size_t RngStream::index(std::size_t n) {
  if (n == 0) throw std::invalid_argument("RngStream::index requires n > 0");
  const auto bound = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x = engine_();
  while (x >= limit) x = engine_();
  return static_cast<std::size_t>(x % bound);
}

}  // namespace warnsim::sim
