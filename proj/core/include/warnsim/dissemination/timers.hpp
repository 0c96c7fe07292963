#pragma once

#include <functional>
#include <string>
#include <string_view>

namespace warnsim::dissemination {

enum class TimerScheme { None, Fixed, SpeedAdaptive, MapPolling };

std::string_view to_string(TimerScheme s);
TimerScheme parse_timer_scheme(std::string_view name);

struct TimerConfig {
  TimerScheme scheme = TimerScheme::None;
  double t_fixed = 2.0;  // s
  double t_min = 1.0;    // s
  double t_max = 5.0;    // s
  double poll = 0.1;     // s, map-polling period

  void validate() const;
};

/// Delay until the next retransmission.
///   Fixed         : t_fixed
///   SpeedAdaptive : t_min + (t_max - t_min) * (1 - v / v_max)
///   MapPolling    : next poll tick if the node stays at an intersection,
///                   otherwise t_max; map_polling_delay applies the full rule
/// Throws std::invalid_argument unless 0 <= v <= v_max.
double retransmission_delay(const TimerConfig& cfg, double v, double v_max, bool at_intersection);

/// Smallest k * poll (k >= 1) at which at_intersection(k * poll) holds, capped at t_max.
double map_polling_delay(const TimerConfig& cfg, const std::function<bool(double)>& at_intersection);

}  // namespace warnsim::dissemination
