#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "warnsim/ctd/ctd.hpp"
#include "warnsim/dissemination/games.hpp"
#include "warnsim/dissemination/protocol.hpp"
#include "warnsim/dissemination/timers.hpp"
#include "warnsim/radio/radio.hpp"

namespace warnsim::scenario {

struct AreaConfig {
  double width = 2500.0;
  double height = 2500.0;
  double block_size = 250.0;
};

struct MobilityConfig {
  double speed_limit = 13.89;       // m/s
  double min_speed_fraction = 0.5;  // vehicle cruise speed drawn from [f, 1] * limit
  double step = 0.1;                // s between position updates
  bool obstacles = false;
  double pedestrian_speed = 1.4;    // m/s
  std::string graph_file;           // optional road graph (JSON)
  std::string trace_file;           // optional mobility trace (CSV)
};

struct BeaconConfig {
  bool enabled = true;
  double interval = 1.0;  // s
  std::uint32_t size_bytes = 100;
  bool adaptive = false;  // adaptive traffic beacon interval
  double i_min = 0.5;
  double i_max = 2.0;
  double neighbor_timeout = 3.0;
};

struct RoutingConfig {
  double lambda = 0.5;
  double w_floor = 0.05;
  double density_ref = 100.0;
  int mac_retries = 3;
  int ttl = 32;
  int sources = 4;
  double rate_bps = 150e3;
  std::uint32_t packet_bytes = 1000;
  double start_time = 5.0;
  double stop_time = 35.0;
  std::vector<Point> rsus;
};

struct DisseminationConfig {
  double alpha1 = 6.0;
  double alpha2 = 4.0;
  double d_threshold_fraction = 0.8;
  double intersection_radius = 10.0;
  double lifetime = 40.0;
  double max_jitter = 0.005;
  int ttl = 64;
  std::uint32_t mtu = 1000;
};

struct TimerVariant {
  std::string name;
  dissemination::TimerConfig timer;
};

struct CtdScenarioConfig {
  ctd::CtdConfig base;
  std::vector<double> p_a{0.1};
  std::vector<int> alert_senders{1};
  double alert_time = 5.0;
  ctd::EventType event_type = ctd::EventType::Accident;
  std::uint32_t query_bytes = 100;
  std::uint32_t reply_bytes = 50;
  std::uint32_t alert_bytes = 200;
  std::optional<Point> event_position;  // area center when absent
};

struct WarningConfig {
  std::optional<Point> origin;  // area center when absent
  double start_time = 5.0;
  std::string frame_trace;
  double fps = 25.0;
  double video_seconds = 4.0;
  int frames = 0;  // overrides video_seconds when positive
  double bitrate = 150e3;
};

struct ScenarioConfig {
  std::string name = "scenario";
  AreaConfig area;
  std::vector<double> densities;
  std::vector<int> pedestrian_counts;
  double duration = 60.0;
  std::vector<std::uint64_t> seeds;
  std::vector<double> rings{300.0, 600.0, 1200.0, 1500.0};
  double ci_level = 0.95;
  std::vector<Protocol> protocols;
  radio::RadioConfig radio;
  MobilityConfig mobility;
  BeaconConfig beacon;
  RoutingConfig routing;
  DisseminationConfig dissemination;
  dissemination::GameConfig game;
  std::vector<TimerVariant> timers;
  CtdScenarioConfig ctd;
  WarningConfig warning;
  bool strict = false;
  std::filesystem::path base_dir;  // relative file paths resolve against this

  Point origin() const;
  Point event_position() const;
  std::filesystem::path resolve(const std::string& file) const;
};

/// Parsing outcome: errors as "path: message", all of them.
struct ConfigResult {
  ScenarioConfig config;
  std::vector<std::string> errors;
  bool ok() const { return errors.empty(); }
};

ConfigResult parse_config_text(const std::string& text, const std::filesystem::path& base_dir = {});
ConfigResult load_config(const std::filesystem::path& path);

/// Semantic checks over a parsed config (also run by the parsers).
std::vector<std::string> validate(const ScenarioConfig& cfg);

/// Parses "3", "1,4,9" or "1-10".
std::vector<std::uint64_t> parse_seed_list(const std::string& text);

/// JSON echo of the config (stable key order).
std::string config_to_json(const ScenarioConfig& cfg);

}  // namespace warnsim::scenario
