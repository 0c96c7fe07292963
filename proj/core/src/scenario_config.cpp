#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "warnsim/scenario/config.hpp"

namespace warnsim::scenario {

using nlohmann::json;

Point ScenarioConfig::origin() const {
  return warning.origin.value_or(Point{area.width / 2.0, area.height / 2.0});
}

Point ScenarioConfig::event_position() const {
  return ctd.event_position.value_or(Point{area.width / 2.0, area.height / 2.0});
}

std::filesystem::path ScenarioConfig::resolve(const std::string& file) const {
  std::filesystem::path p(file);
  if (p.is_relative() && !base_dir.empty()) return base_dir / p;
  return p;
}

namespace {

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

class Reader {
 public:
  explicit Reader(std::vector<std::string>& errors) : errors_(errors) {}

  void error(const std::string& path, const std::string& msg) {
    errors_.push_back((path.empty() ? std::string("<root>") : path) + ": " + msg);
  }

  void allow(const json& obj, const std::string& path, std::initializer_list<const char*> keys) {
    for (const auto& [k, v] : obj.items()) {
      if (std::none_of(keys.begin(), keys.end(), [&](const char* a) { return k == a; })) {
        error(join(path, k), "unknown field");
      }
    }
  }

  const json* object(const json& parent, const char* key, const std::string& path) {
    if (!parent.contains(key)) return nullptr;
    const json& v = parent.at(key);
    if (!v.is_object()) {
      error(join(path, key), "expected an object");
      return nullptr;
    }
    return &v;
  }

  void number(const json& obj, const char* key, const std::string& path, double& out) {
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    if (!v.is_number()) return error(join(path, key), "expected a number");
    out = v.get<double>();
  }

  template <class Int>
  void integer(const json& obj, const char* key, const std::string& path, Int& out) {
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    if (!v.is_number_integer()) return error(join(path, key), "expected an integer");
    if constexpr (std::is_unsigned_v<Int>) {
      if (v.get<long long>() < 0) return error(join(path, key), "must be non-negative");
    }
    out = v.get<Int>();
  }

  void boolean(const json& obj, const char* key, const std::string& path, bool& out) {
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    if (!v.is_boolean()) return error(join(path, key), "expected true or false");
    out = v.get<bool>();
  }

  void string(const json& obj, const char* key, const std::string& path, std::string& out) {
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    if (!v.is_string()) return error(join(path, key), "expected a string");
    out = v.get<std::string>();
  }

  std::optional<Point> point(const json& v, const std::string& path) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
      error(path, "expected [x, y]");
      return std::nullopt;
    }
    return Point{v[0].get<double>(), v[1].get<double>()};
  }

  void point(const json& obj, const char* key, const std::string& path, std::optional<Point>& out) {
    if (!obj.contains(key) || obj.at(key).is_null()) return;
    if (auto p = point(obj.at(key), join(path, key))) out = p;
  }

  void numbers(const json& obj, const char* key, const std::string& path, std::vector<double>& out) {
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    if (!v.is_array()) return error(join(path, key), "expected an array of numbers");
    out.clear();
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) {
        error(join(path, key) + "[" + std::to_string(i) + "]", "expected a number");
        continue;
      }
      out.push_back(v[i].get<double>());
    }
  }

  template <class Int>
  void integers(const json& obj, const char* key, const std::string& path, std::vector<Int>& out) {
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    if (!v.is_array()) return error(join(path, key), "expected an array of integers");
    out.clear();
    for (std::size_t i = 0; i < v.size(); ++i) {
      const std::string p = join(path, key) + "[" + std::to_string(i) + "]";
      if (!v[i].is_number_integer()) {
        error(p, "expected an integer");
        continue;
      }
      if (std::is_unsigned_v<Int> && v[i].get<long long>() < 0) {
        error(p, "must be non-negative");
        continue;
      }
      out.push_back(v[i].get<Int>());
    }
  }

 private:
  std::vector<std::string>& errors_;
};

void parse_into(const json& j, ScenarioConfig& c, Reader& r) {
  if (!j.is_object()) {
    r.error("", "config must be a JSON object");
    return;
  }
  r.allow(j, "", {"name", "area", "densities", "pedestrian_counts", "pedestrian_count", "duration",
                  "seeds", "rings", "ci_level", "protocols", "radio", "mobility", "beacon", "routing",
                  "dissemination", "game", "timers", "ctd", "warning", "strict"});
  r.string(j, "name", "", c.name);
  r.numbers(j, "densities", "", c.densities);
  r.integers(j, "pedestrian_counts", "", c.pedestrian_counts);
  if (j.contains("pedestrian_count")) {
    int n = 0;
    r.integer(j, "pedestrian_count", "", n);
    c.pedestrian_counts = {n};
  }
  r.number(j, "duration", "", c.duration);
  if (j.contains("seeds")) {
    c.seeds.clear();
    if (j.at("seeds").is_string()) {
      try {
        c.seeds = parse_seed_list(j.at("seeds").get<std::string>());
      } catch (const std::invalid_argument& e) {
        r.error("seeds", e.what());
      }
    } else {
      r.integers(j, "seeds", "", c.seeds);
    }
  }
  r.numbers(j, "rings", "", c.rings);
  r.number(j, "ci_level", "", c.ci_level);
  r.boolean(j, "strict", "", c.strict);

  if (j.contains("protocols")) {
    const json& v = j.at("protocols");
    if (!v.is_array()) {
      r.error("protocols", "expected an array of protocol names");
    } else {
      for (std::size_t i = 0; i < v.size(); ++i) {
        const std::string p = "protocols[" + std::to_string(i) + "]";
        if (!v[i].is_string()) {
          r.error(p, "expected a string");
          continue;
        }
        try {
          c.protocols.push_back(parse_protocol(v[i].get<std::string>()));
        } catch (const std::invalid_argument& e) {
          r.error(p, e.what());
        }
      }
    }
  }

  if (const json* a = r.object(j, "area", "")) {
    r.allow(*a, "area", {"width", "height", "block_size"});
    r.number(*a, "width", "area", c.area.width);
    r.number(*a, "height", "area", c.area.height);
    r.number(*a, "block_size", "area", c.area.block_size);
  }
  if (const json* a = r.object(j, "radio", "")) {
    r.allow(*a, "radio", {"r_max", "bitrate", "per_link_loss", "obstacle_blocking", "slot"});
    r.number(*a, "r_max", "radio", c.radio.r_max);
    r.number(*a, "bitrate", "radio", c.radio.bitrate);
    r.number(*a, "per_link_loss", "radio", c.radio.per_link_loss);
    r.boolean(*a, "obstacle_blocking", "radio", c.radio.obstacle_blocking);
    r.number(*a, "slot", "radio", c.radio.slot);
  }
  if (const json* a = r.object(j, "mobility", "")) {
    r.allow(*a, "mobility", {"speed_limit", "min_speed_fraction", "step", "obstacles",
                             "pedestrian_speed", "graph_file", "trace_file"});
    r.number(*a, "speed_limit", "mobility", c.mobility.speed_limit);
    r.number(*a, "min_speed_fraction", "mobility", c.mobility.min_speed_fraction);
    r.number(*a, "step", "mobility", c.mobility.step);
    r.boolean(*a, "obstacles", "mobility", c.mobility.obstacles);
    r.number(*a, "pedestrian_speed", "mobility", c.mobility.pedestrian_speed);
    r.string(*a, "graph_file", "mobility", c.mobility.graph_file);
    r.string(*a, "trace_file", "mobility", c.mobility.trace_file);
  }
  if (const json* a = r.object(j, "beacon", "")) {
    r.allow(*a, "beacon", {"enabled", "interval", "size_bytes", "adaptive", "i_min", "i_max",
                           "neighbor_timeout"});
    r.boolean(*a, "enabled", "beacon", c.beacon.enabled);
    r.number(*a, "interval", "beacon", c.beacon.interval);
    r.integer(*a, "size_bytes", "beacon", c.beacon.size_bytes);
    r.boolean(*a, "adaptive", "beacon", c.beacon.adaptive);
    r.number(*a, "i_min", "beacon", c.beacon.i_min);
    r.number(*a, "i_max", "beacon", c.beacon.i_max);
    r.number(*a, "neighbor_timeout", "beacon", c.beacon.neighbor_timeout);
  }
  if (const json* a = r.object(j, "routing", "")) {
    r.allow(*a, "routing", {"lambda", "w_floor", "density_ref", "mac_retries", "ttl", "sources",
                            "rate_bps", "packet_bytes", "start_time", "stop_time", "rsus"});
    r.number(*a, "lambda", "routing", c.routing.lambda);
    r.number(*a, "w_floor", "routing", c.routing.w_floor);
    r.number(*a, "density_ref", "routing", c.routing.density_ref);
    r.integer(*a, "mac_retries", "routing", c.routing.mac_retries);
    r.integer(*a, "ttl", "routing", c.routing.ttl);
    r.integer(*a, "sources", "routing", c.routing.sources);
    r.number(*a, "rate_bps", "routing", c.routing.rate_bps);
    r.integer(*a, "packet_bytes", "routing", c.routing.packet_bytes);
    r.number(*a, "start_time", "routing", c.routing.start_time);
    r.number(*a, "stop_time", "routing", c.routing.stop_time);
    if (a->contains("rsus")) {
      const json& v = a->at("rsus");
      if (!v.is_array()) {
        r.error("routing.rsus", "expected an array of [x, y]");
      } else {
        for (std::size_t i = 0; i < v.size(); ++i) {
          if (auto p = r.point(v[i], "routing.rsus[" + std::to_string(i) + "]")) {
            c.routing.rsus.push_back(*p);
          }
        }
      }
    }
  }
  if (const json* a = r.object(j, "dissemination", "")) {
    r.allow(*a, "dissemination", {"alpha1", "alpha2", "d_threshold_fraction", "intersection_radius",
                                  "lifetime", "max_jitter", "ttl", "mtu"});
    r.number(*a, "alpha1", "dissemination", c.dissemination.alpha1);
    r.number(*a, "alpha2", "dissemination", c.dissemination.alpha2);
    r.number(*a, "d_threshold_fraction", "dissemination", c.dissemination.d_threshold_fraction);
    r.number(*a, "intersection_radius", "dissemination", c.dissemination.intersection_radius);
    r.number(*a, "lifetime", "dissemination", c.dissemination.lifetime);
    r.number(*a, "max_jitter", "dissemination", c.dissemination.max_jitter);
    r.integer(*a, "ttl", "dissemination", c.dissemination.ttl);
    r.integer(*a, "mtu", "dissemination", c.dissemination.mtu);
  }
  if (const json* a = r.object(j, "game", "")) {
    r.allow(*a, "game", {"cost_k", "fg_benefit", "fg_cost", "fg_tol", "fg_max_iters"});
    r.number(*a, "cost_k", "game", c.game.cost_k);
    r.number(*a, "fg_benefit", "game", c.game.fg_benefit);
    r.number(*a, "fg_cost", "game", c.game.fg_cost);
    r.number(*a, "fg_tol", "game", c.game.fg_tol);
    r.integer(*a, "fg_max_iters", "game", c.game.fg_max_iters);
  }
  if (j.contains("timers")) {
    const json& v = j.at("timers");
    if (!v.is_array()) {
      r.error("timers", "expected an array of timer variants");
    } else {
      for (std::size_t i = 0; i < v.size(); ++i) {
        const std::string p = "timers[" + std::to_string(i) + "]";
        if (!v[i].is_object()) {
          r.error(p, "expected an object");
          continue;
        }
        TimerVariant tv;
        r.allow(v[i], p, {"name", "scheme", "t_fixed", "t_min", "t_max", "poll"});
        r.string(v[i], "name", p, tv.name);
        std::string scheme = "fixed";
        r.string(v[i], "scheme", p, scheme);
        try {
          tv.timer.scheme = dissemination::parse_timer_scheme(scheme);
        } catch (const std::invalid_argument& e) {
          r.error(p + ".scheme", e.what());
        }
        r.number(v[i], "t_fixed", p, tv.timer.t_fixed);
        r.number(v[i], "t_min", p, tv.timer.t_min);
        r.number(v[i], "t_max", p, tv.timer.t_max);
        r.number(v[i], "poll", p, tv.timer.poll);
        c.timers.push_back(tv);
      }
    }
  }
  if (const json* a = r.object(j, "ctd", "")) {
    r.allow(*a, "ctd", {"reply_window", "majority_threshold", "p_a", "dup_radius", "dup_window",
                        "alert_senders", "alert_time", "event_type", "query_bytes", "reply_bytes",
                        "alert_bytes", "event_position"});
    r.number(*a, "reply_window", "ctd", c.ctd.base.reply_window);
    r.number(*a, "majority_threshold", "ctd", c.ctd.base.majority_threshold);
    if (a->contains("p_a") && a->at("p_a").is_number()) {
      c.ctd.p_a = {a->at("p_a").get<double>()};
    } else {
      r.numbers(*a, "p_a", "ctd", c.ctd.p_a);
    }
    r.number(*a, "dup_radius", "ctd", c.ctd.base.dup_radius);
    r.number(*a, "dup_window", "ctd", c.ctd.base.dup_window);
    r.integers(*a, "alert_senders", "ctd", c.ctd.alert_senders);
    r.number(*a, "alert_time", "ctd", c.ctd.alert_time);
    std::string et;
    r.string(*a, "event_type", "ctd", et);
    if (!et.empty()) {
      bool found = false;
      for (auto t : {ctd::EventType::Accident, ctd::EventType::Fire, ctd::EventType::Flood,
                     ctd::EventType::Crowd, ctd::EventType::Other}) {
        if (ctd::to_string(t) == et) {
          c.ctd.event_type = t;
          found = true;
        }
      }
      if (!found) r.error("ctd.event_type", "unknown event type '" + et + "'");
    }
    r.integer(*a, "query_bytes", "ctd", c.ctd.query_bytes);
    r.integer(*a, "reply_bytes", "ctd", c.ctd.reply_bytes);
    r.integer(*a, "alert_bytes", "ctd", c.ctd.alert_bytes);
    r.point(*a, "event_position", "ctd", c.ctd.event_position);
  }
  if (const json* a = r.object(j, "warning", "")) {
    r.allow(*a, "warning", {"origin", "start_time", "frame_trace", "fps", "video_seconds", "frames",
                            "bitrate"});
    r.point(*a, "origin", "warning", c.warning.origin);
    r.number(*a, "start_time", "warning", c.warning.start_time);
    r.string(*a, "frame_trace", "warning", c.warning.frame_trace);
    r.number(*a, "fps", "warning", c.warning.fps);
    r.number(*a, "video_seconds", "warning", c.warning.video_seconds);
    r.integer(*a, "frames", "warning", c.warning.frames);
    r.number(*a, "bitrate", "warning", c.warning.bitrate);
  }
}

bool in_area(Point p, const AreaConfig& a) {
  return p.x >= 0.0 && p.y >= 0.0 && p.x <= a.width && p.y <= a.height;
}

}  // namespace

std::vector<std::string> validate(const ScenarioConfig& c) {
  std::vector<std::string> errs;
  const auto err = [&](const std::string& path, const std::string& msg) {
    errs.push_back(path + ": " + msg);
  };

  if (c.name.empty() ||
      !std::all_of(c.name.begin(), c.name.end(), [](char ch) {
        return std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '_' || ch == '.';
      })) {
    err("name", "must be non-empty and use only letters, digits, '-', '_' or '.'");
  }
  if (!(c.area.width > 0.0) || !(c.area.height > 0.0)) err("area", "width and height must be positive");
  if (!(c.area.block_size > 0.0) || !(c.area.block_size < std::min(c.area.width, c.area.height))) {
    err("area.block_size", "must be positive and smaller than both area sides");
  }
  if (!(c.duration > 0.0)) err("duration", "must be positive");
  if (c.seeds.empty()) err("seeds", "must not be empty");
  {
    std::set<std::uint64_t> uniq(c.seeds.begin(), c.seeds.end());
    if (uniq.size() != c.seeds.size()) err("seeds", "must not repeat");
  }
  if (c.rings.empty()) err("rings", "must not be empty");
  for (std::size_t i = 0; i < c.rings.size(); ++i) {
    if (!(c.rings[i] > 0.0) || (i > 0 && !(c.rings[i] > c.rings[i - 1]))) {
      err("rings", "must be positive and strictly increasing");
      break;
    }
  }
  if (!(c.ci_level > 0.0 && c.ci_level < 1.0)) err("ci_level", "must lie in (0, 1)");

  std::optional<ProtocolFamily> fam;
  if (c.protocols.empty()) err("protocols", "must not be empty");
  for (Protocol p : c.protocols) {
    if (!fam) fam = family_of(p);
    if (family_of(p) != *fam) {
      err("protocols", "cannot mix unicast, dissemination and ctd protocols in one config");
      break;
    }
  }
  {
    std::set<Protocol> uniq(c.protocols.begin(), c.protocols.end());
    if (uniq.size() != c.protocols.size()) err("protocols", "must not repeat");
  }
  const bool vehicular = fam && *fam != ProtocolFamily::Ctd;
  if (vehicular) {
    if (c.densities.empty()) err("densities", "must not be empty");
    for (double d : c.densities) {
      if (!(d > 0.0)) {
        err("densities", "every density must be positive");
        break;
      }
    }
    if (!c.beacon.enabled) err("beacon.enabled", "hello beacons are required by vehicular protocols");
  }
  if (fam == ProtocolFamily::Ctd) {
    if (c.pedestrian_counts.empty()) err("pedestrian_counts", "must not be empty");
    for (int n : c.pedestrian_counts) {
      if (n < 1) {
        err("pedestrian_counts", "every count must be at least 1");
        break;
      }
    }
  }

  if (!(c.radio.r_max > 0.0)) err("radio.r_max", "must be positive");
  if (!(c.radio.bitrate > 0.0)) err("radio.bitrate", "must be positive");
  if (!(c.radio.per_link_loss >= 0.0 && c.radio.per_link_loss <= 1.0)) {
    err("radio.per_link_loss", "must lie in [0, 1]");
  }
  if (!(c.radio.slot > 0.0)) err("radio.slot", "must be positive");

  if (!(c.mobility.speed_limit > 0.0)) err("mobility.speed_limit", "must be positive");
  if (!(c.mobility.min_speed_fraction > 0.0 && c.mobility.min_speed_fraction <= 1.0)) {
    err("mobility.min_speed_fraction", "must lie in (0, 1]");
  }
  if (!(c.mobility.step > 0.0)) err("mobility.step", "must be positive");
  if (!(c.mobility.pedestrian_speed > 0.0)) err("mobility.pedestrian_speed", "must be positive");
  if (!c.mobility.trace_file.empty()) {
    if (c.mobility.graph_file.empty()) err("mobility.trace_file", "requires mobility.graph_file");
    if (!std::filesystem::exists(c.resolve(c.mobility.trace_file))) {
      err("mobility.trace_file", "file not found: " + c.resolve(c.mobility.trace_file).string());
    }
  }
  if (!c.mobility.graph_file.empty() && !std::filesystem::exists(c.resolve(c.mobility.graph_file))) {
    err("mobility.graph_file", "file not found: " + c.resolve(c.mobility.graph_file).string());
  }

  if (!(c.beacon.interval > 0.0)) err("beacon.interval", "must be positive");
  if (c.beacon.size_bytes == 0) err("beacon.size_bytes", "must be positive");
  if (!(c.beacon.i_min > 0.0) || !(c.beacon.i_min <= c.beacon.i_max)) {
    err("beacon", "requires 0 < i_min <= i_max");
  }
  if (!(c.beacon.neighbor_timeout > 0.0)) err("beacon.neighbor_timeout", "must be positive");

  const auto& rt = c.routing;
  if (!(rt.lambda >= 0.0 && rt.lambda <= 1.0)) err("routing.lambda", "must lie in [0, 1]");
  if (!(rt.w_floor >= 0.0 && rt.w_floor <= 0.2)) err("routing.w_floor", "must lie in [0, 0.2]");
  if (!(rt.density_ref > 0.0)) err("routing.density_ref", "must be positive");
  if (rt.mac_retries < 0) err("routing.mac_retries", "must be non-negative");
  if (rt.ttl < 1) err("routing.ttl", "must be at least 1");
  if (fam == ProtocolFamily::Unicast) {
    if (rt.sources < 1) err("routing.sources", "must be at least 1");
    if (!(rt.rate_bps > 0.0)) err("routing.rate_bps", "must be positive");
    if (rt.packet_bytes == 0) err("routing.packet_bytes", "must be positive");
    if (!(rt.start_time >= 0.0 && rt.start_time < rt.stop_time && rt.stop_time <= c.duration)) {
      err("routing", "requires 0 <= start_time < stop_time <= duration");
    }
    if (rt.rsus.empty()) err("routing.rsus", "unicast protocols need at least one RSU");
    for (const auto& p : rt.rsus) {
      if (!in_area(p, c.area)) err("routing.rsus", "every RSU must lie inside the area");
    }
  }

  const auto& ds = c.dissemination;
  if (std::abs(ds.alpha1 + ds.alpha2 - 10.0) > 1e-9) {
    err("dissemination", "alpha1+alpha2 must equal 10");
  }
  if (!(ds.alpha1 >= 0.0) || !(ds.alpha2 >= 0.0)) err("dissemination", "alphas must be non-negative");
  if (!(ds.d_threshold_fraction >= 0.0 && ds.d_threshold_fraction <= 1.0)) {
    err("dissemination.d_threshold_fraction", "must lie in [0, 1]");
  }
  if (!(ds.intersection_radius > 0.0)) err("dissemination.intersection_radius", "must be positive");
  if (!(ds.lifetime > 0.0)) err("dissemination.lifetime", "must be positive");
  if (!(ds.max_jitter >= 0.0)) err("dissemination.max_jitter", "must be non-negative");
  if (ds.ttl < 1) err("dissemination.ttl", "must be at least 1");
  if (ds.mtu == 0) err("dissemination.mtu", "must be positive");

  try {
    c.game.validate();
  } catch (const std::invalid_argument& e) {
    err("game", e.what());
  }

  std::set<std::string> timer_names;
  for (std::size_t i = 0; i < c.timers.size(); ++i) {
    const std::string p = "timers[" + std::to_string(i) + "]";
    if (c.timers[i].name.empty()) err(p + ".name", "must not be empty");
    if (!timer_names.insert(c.timers[i].name).second) err(p + ".name", "duplicate timer name");
    try {
      c.timers[i].timer.validate();
    } catch (const std::invalid_argument& e) {
      err(p, e.what());
    }
  }
  if (!c.timers.empty() && fam != ProtocolFamily::Dissemination) {
    err("timers", "timer variants apply to dissemination protocols only");
  }

  try {
    c.ctd.base.validate();
  } catch (const std::invalid_argument& e) {
    err("ctd", e.what());
  }
  if (c.ctd.p_a.empty()) err("ctd.p_a", "must not be empty");
  for (double p : c.ctd.p_a) {
    if (!(p >= 0.0 && p <= 1.0)) {
      err("ctd.p_a", "every value must lie in [0, 1]");
      break;
    }
  }
  if (c.ctd.alert_senders.empty()) err("ctd.alert_senders", "must not be empty");
  for (int s : c.ctd.alert_senders) {
    const int most = c.pedestrian_counts.empty()
                         ? s
                         : *std::min_element(c.pedestrian_counts.begin(), c.pedestrian_counts.end());
    if (s < 1 || s > most) {
      err("ctd.alert_senders", "every value must lie in [1, smallest pedestrian count]");
      break;
    }
  }
  if (fam == ProtocolFamily::Ctd && !(c.ctd.alert_time >= 0.0 && c.ctd.alert_time < c.duration)) {
    err("ctd.alert_time", "must lie in [0, duration)");
  }
  if (c.ctd.query_bytes == 0 || c.ctd.reply_bytes == 0 || c.ctd.alert_bytes == 0) {
    err("ctd", "message sizes must be positive");
  }
  if (c.ctd.event_position && !in_area(*c.ctd.event_position, c.area)) {
    err("ctd.event_position", "must lie inside the area");
  }

  const auto& w = c.warning;
  if (fam == ProtocolFamily::Dissemination &&
      !(w.start_time >= 0.0 && w.start_time < c.duration)) {
    err("warning.start_time", "must lie in [0, duration)");
  }
  if (!(w.fps > 0.0)) err("warning.fps", "must be positive");
  if (w.frames < 0) err("warning.frames", "must be non-negative");
  if (w.frames == 0 && !(w.video_seconds > 0.0)) err("warning.video_seconds", "must be positive");
  if (!(w.bitrate > 0.0)) err("warning.bitrate", "must be positive");
  if (!w.frame_trace.empty() && !std::filesystem::exists(c.resolve(w.frame_trace))) {
    err("warning.frame_trace", "file not found: " + c.resolve(w.frame_trace).string());
  }
  if (w.origin && !in_area(*w.origin, c.area)) err("warning.origin", "must lie inside the area");
  return errs;
}

ConfigResult parse_config_text(const std::string& text, const std::filesystem::path& base_dir) {
  ConfigResult res;
  res.config.base_dir = base_dir;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    res.errors.push_back(std::string("<root>: invalid JSON: ") + e.what());
    return res;
  }
  Reader r(res.errors);
  parse_into(j, res.config, r);
  auto more = validate(res.config);
  res.errors.insert(res.errors.end(), more.begin(), more.end());
  return res;
}

ConfigResult load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    ConfigResult res;
    res.errors.push_back(path.string() + ": cannot open file");
    return res;
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path.parent_path());
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  const auto parse_one = [](std::string_view s) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
      throw std::invalid_argument("bad seed '" + std::string(s) + "'");
    }
    return v;
  };
  std::vector<std::uint64_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto dash = item.find('-');
    if (dash != std::string::npos) {
      const auto lo = parse_one(std::string_view(item).substr(0, dash));
      const auto hi = parse_one(std::string_view(item).substr(dash + 1));
      if (hi < lo) throw std::invalid_argument("bad seed range '" + item + "'");
      for (auto s = lo; s <= hi; ++s) out.push_back(s);
    } else {
      out.push_back(parse_one(item));
    }
  }
  if (out.empty()) throw std::invalid_argument("empty seed list");
  return out;
}

std::string config_to_json(const ScenarioConfig& c) {
  const auto pt = [](const std::optional<Point>& p) -> json {
    if (!p) return nullptr;
    return json::array({p->x, p->y});
  };
  json j;
  j["name"] = c.name;
  j["area"] = {{"width", c.area.width}, {"height", c.area.height}, {"block_size", c.area.block_size}};
  j["densities"] = c.densities;
  j["pedestrian_counts"] = c.pedestrian_counts;
  j["duration"] = c.duration;
  j["seeds"] = c.seeds;
  j["rings"] = c.rings;
  j["ci_level"] = c.ci_level;
  json protos = json::array();
  for (auto p : c.protocols) protos.push_back(std::string(to_string(p)));
  j["protocols"] = protos;
  j["radio"] = {{"r_max", c.radio.r_max},
                {"bitrate", c.radio.bitrate},
                {"per_link_loss", c.radio.per_link_loss},
                {"obstacle_blocking", c.radio.obstacle_blocking},
                {"slot", c.radio.slot}};
  j["mobility"] = {{"speed_limit", c.mobility.speed_limit},
                   {"min_speed_fraction", c.mobility.min_speed_fraction},
                   {"step", c.mobility.step},
                   {"obstacles", c.mobility.obstacles},
                   {"pedestrian_speed", c.mobility.pedestrian_speed},
                   {"graph_file", c.mobility.graph_file},
                   {"trace_file", c.mobility.trace_file}};
  j["beacon"] = {{"enabled", c.beacon.enabled},       {"interval", c.beacon.interval},
                 {"size_bytes", c.beacon.size_bytes}, {"adaptive", c.beacon.adaptive},
                 {"i_min", c.beacon.i_min},           {"i_max", c.beacon.i_max},
                 {"neighbor_timeout", c.beacon.neighbor_timeout}};
  json rsus = json::array();
  for (const auto& p : c.routing.rsus) rsus.push_back(json::array({p.x, p.y}));
  j["routing"] = {{"lambda", c.routing.lambda},
                  {"w_floor", c.routing.w_floor},
                  {"density_ref", c.routing.density_ref},
                  {"mac_retries", c.routing.mac_retries},
                  {"ttl", c.routing.ttl},
                  {"sources", c.routing.sources},
                  {"rate_bps", c.routing.rate_bps},
                  {"packet_bytes", c.routing.packet_bytes},
                  {"start_time", c.routing.start_time},
                  {"stop_time", c.routing.stop_time},
                  {"rsus", rsus}};
  j["dissemination"] = {{"alpha1", c.dissemination.alpha1},
                        {"alpha2", c.dissemination.alpha2},
                        {"d_threshold_fraction", c.dissemination.d_threshold_fraction},
                        {"intersection_radius", c.dissemination.intersection_radius},
                        {"lifetime", c.dissemination.lifetime},
                        {"max_jitter", c.dissemination.max_jitter},
                        {"ttl", c.dissemination.ttl},
                        {"mtu", c.dissemination.mtu}};
  j["game"] = {{"cost_k", c.game.cost_k},
               {"fg_benefit", c.game.fg_benefit},
               {"fg_cost", c.game.fg_cost},
               {"fg_tol", c.game.fg_tol},
               {"fg_max_iters", c.game.fg_max_iters}};
  json timers = json::array();
  for (const auto& t : c.timers) {
    timers.push_back({{"name", t.name},
                      {"scheme", std::string(dissemination::to_string(t.timer.scheme))},
                      {"t_fixed", t.timer.t_fixed},
                      {"t_min", t.timer.t_min},
                      {"t_max", t.timer.t_max},
                      {"poll", t.timer.poll}});
  }
  j["timers"] = timers;
  j["ctd"] = {{"reply_window", c.ctd.base.reply_window},
              {"majority_threshold", c.ctd.base.majority_threshold},
              {"p_a", c.ctd.p_a},
              {"dup_radius", c.ctd.base.dup_radius},
              {"dup_window", c.ctd.base.dup_window},
              {"alert_senders", c.ctd.alert_senders},
              {"alert_time", c.ctd.alert_time},
              {"event_type", std::string(ctd::to_string(c.ctd.event_type))},
              {"query_bytes", c.ctd.query_bytes},
              {"reply_bytes", c.ctd.reply_bytes},
              {"alert_bytes", c.ctd.alert_bytes},
              {"event_position", pt(c.ctd.event_position)}};
  j["warning"] = {{"origin", pt(c.warning.origin)},
                  {"start_time", c.warning.start_time},
                  {"frame_trace", c.warning.frame_trace},
                  {"fps", c.warning.fps},
                  {"video_seconds", c.warning.video_seconds},
                  {"frames", c.warning.frames},
                  {"bitrate", c.warning.bitrate}};
  j["strict"] = c.strict;
  return j.dump(2);
}

}  // namespace warnsim::scenario
