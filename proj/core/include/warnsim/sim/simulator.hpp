#pragma once

#include <cstdint>
#include <functional>
#include <queue>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace warnsim::sim {

using Seconds = double;

enum class EventKind : std::uint8_t {
  TransmitStart,
  TransmitEnd,
  TimerExpiry,
  Beacon,
  MobilityStep,
  MetricSnapshot,
};

std::string_view to_string(EventKind kind);

/// Target value for events addressed to the engine rather than a node.
inline constexpr std::uint32_t kEngineTarget = 0xffffffffu;

struct SimEvent {
  Seconds fire_time = 0.0;
  std::uint64_t sequence = 0;
  std::uint32_t target = kEngineTarget;
  EventKind kind = EventKind::TimerExpiry;
  std::uint64_t token = 0;  // opaque reference (message id, timer token)
};

class EventHandle {
 public:
  EventHandle() = default;
  explicit EventHandle(std::uint64_t sequence) : sequence_(sequence), valid_(true) {}

  bool valid() const { return valid_; }
  std::uint64_t sequence() const { return sequence_; }

 private:
  std::uint64_t sequence_ = 0;
  bool valid_ = false;
};

/// Running digest of the processed event stream. Two runs with the same
/// scenario and seed produce the same digest and count.
struct TraceDigest {
  std::uint64_t hash = 1469598103934665603ull;
  std::uint64_t events = 0;

  void add(const SimEvent& ev);
  bool operator==(const TraceDigest&) const = default;
};

/// Single-threaded discrete-event engine. Events are ordered by fire time,
/// then by insertion sequence.
class Simulator {
 public:
  using Handler = std::function<void(const SimEvent&)>;

  Simulator() = default;
  Simulator(const Simulator&) = delete;
  Simulator& operator=(const Simulator&) = delete;

  /// Throws std::logic_error when fire_time lies before the current clock.
  EventHandle schedule(Seconds fire_time, EventKind kind, std::uint32_t target, Handler handler,
                       std::uint64_t token = 0);
  EventHandle schedule_in(Seconds delay, EventKind kind, std::uint32_t target, Handler handler,
                          std::uint64_t token = 0) {
    return schedule(now_ + delay, kind, target, std::move(handler), token);
  }

  /// Returns false when the event already fired or was cancelled.
  bool cancel(const EventHandle& handle);

  /// Processes every event with fire_time <= t_end and leaves the clock at t_end.
  /// Handler exceptions are rethrown as std::runtime_error carrying event context.
  Seconds run_until(Seconds t_end);

  Seconds now() const { return now_; }
  std::size_t pending() const { return queue_.size() - cancelled_.size(); }
  std::uint64_t processed() const { return digest_.events; }
  const TraceDigest& digest() const { return digest_; }

  /// When enabled, every processed event is appended to trace().
  void record_trace(bool on) { record_ = on; }
  const std::vector<SimEvent>& trace() const { return trace_; }

 private:
  struct Entry {
    SimEvent event;
    Handler handler;
  };
  struct Later {
    bool operator()(const Entry& a, const Entry& b) const {
      if (a.event.fire_time != b.event.fire_time) return a.event.fire_time > b.event.fire_time;
      return a.event.sequence > b.event.sequence;
    }
  };

  std::priority_queue<Entry, std::vector<Entry>, Later> queue_;
  std::unordered_set<std::uint64_t> cancelled_;
  std::unordered_set<std::uint64_t> live_;
  Seconds now_ = 0.0;
  std::uint64_t next_sequence_ = 0;
  TraceDigest digest_;
  bool record_ = false;
  std::vector<SimEvent> trace_;
};

}  // namespace warnsim::sim
