#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "json.hpp"

#include "warnsim/scenario/report.hpp"

namespace warnsim::scenario {

namespace {

using GroupKey = std::tuple<std::string, std::string, double>;

GroupKey key_of(const RunSpec& s) { return {std::string(to_string(s.protocol)), s.variant, s.density}; }

std::pair<std::string, std::string> split_metric(const std::string& key) {
  const auto at = key.find('@');
  if (at == std::string::npos) return {key, "all"};
  return {key.substr(0, at), key.substr(at + 1)};
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

nlohmann::json json_number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "NA";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::vector<AggregateRow> aggregate(const ScenarioConfig& cfg, std::span<const RunResult> runs) {
  std::vector<GroupKey> order;
  std::map<GroupKey, std::map<std::string, std::vector<double>>> groups;
  for (const auto& r : runs) {
    const auto k = key_of(r.spec);
    auto [it, inserted] = groups.try_emplace(k);
    if (inserted) order.push_back(k);
    for (const auto& [name, value] : r.values) it->second[name].push_back(value);
  }
  std::vector<AggregateRow> rows;
  for (const auto& k : order) {
    for (const auto& [name, values] : groups[k]) {
      AggregateRow row;
      std::tie(row.protocol, row.variant, row.density) = k;
      std::tie(row.metric, row.ring) = split_metric(name);
      if (values.size() >= 2) {
        row.ci = metrics::ci(values, cfg.ci_level);
      } else {
        row.ci.mean = values.front();
        row.ci.half_width = std::numeric_limits<double>::quiet_NaN();
        row.ci.level = cfg.ci_level;
        row.ci.n_runs = values.size();
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

const AggregateRow* find_row(std::span<const AggregateRow> rows, std::string_view protocol,
                             std::string_view variant, double density, std::string_view ring,
                             std::string_view metric) {
  for (const auto& r : rows) {
    if (r.protocol == protocol && r.variant == variant && r.density == density && r.ring == ring &&
        r.metric == metric) {
      return &r;
    }
  }
  return nullptr;
}

std::string table_csv(std::span<const AggregateRow> rows) {
  std::ostringstream out;
  out << "protocol,variant,density,ring,metric,mean,half_width,level,n_runs\n";
  for (const auto& r : rows) {
    out << csv_field(r.protocol) << ',' << csv_field(r.variant) << ','
        << format_number(r.density) << ',' << r.ring << ',' << r.metric << ','
        << format_number(r.ci.mean) << ',' << format_number(r.ci.half_width) << ','
        << format_number(r.ci.level) << ',' << r.ci.n_runs << '\n';
  }
  return out.str();
}

std::string series_csv(const ScenarioConfig& cfg, std::span<const RunResult> runs) {
  std::ostringstream out;
  out << "protocol,variant,density,seed,time,cumulative_duplicates\n";
  for (const auto& r : runs) {
    const auto series = r.ledger.duplicates_series(1.0, cfg.duration);
    for (std::size_t i = 0; i < series.size(); ++i) {
      out << to_string(r.spec.protocol) << ',' << csv_field(r.spec.variant) << ','
          << format_number(r.spec.density) << ',' << r.spec.seed << ','
          << format_number(static_cast<double>(i + 1)) << ',' << series[i] << '\n';
    }
  }
  return out.str();
}

std::string summary_json(const ScenarioConfig& cfg, std::span<const RunResult> runs,
                         std::span<const AggregateRow> rows) {
  nlohmann::ordered_json j;
  j["scenario"] = cfg.name;
  j["config"] = nlohmann::json::parse(config_to_json(cfg));
  std::uint64_t nonconverged = 0;
  auto& jr = j["runs"] = nlohmann::json::array();
  for (const auto& r : runs) {
    nonconverged += r.nonconverged;
    nlohmann::ordered_json e;
    e["protocol"] = std::string(to_string(r.spec.protocol));
    e["variant"] = r.spec.variant;
    e["density"] = r.spec.density;
    e["seed"] = r.spec.seed;
    e["nodes"] = r.node_count;
    e["events"] = r.digest.events;
    char hex[20];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(r.digest.hash));
    e["digest"] = hex;
    e["nonconverged"] = r.nonconverged;
    e["conserved"] = r.ledger.conserved();
    auto& v = e["values"] = nlohmann::ordered_json::object();
    for (const auto& [k, x] : r.values) v[k] = json_number(x);
    e["drops"] = r.ledger.drops();
    jr.push_back(std::move(e));
  }
  j["nonconverged_total"] = nonconverged;
  auto& ja = j["aggregates"] = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json e;
    e["protocol"] = r.protocol;
    e["variant"] = r.variant;
    e["density"] = r.density;
    e["ring"] = r.ring;
    e["metric"] = r.metric;
    e["mean"] = json_number(r.ci.mean);
    e["half_width"] = json_number(r.ci.half_width);
    e["level"] = r.ci.level;
    e["n_runs"] = r.ci.n_runs;
    ja.push_back(std::move(e));
  }
  return j.dump(2) + "\n";
}

std::vector<std::filesystem::path> write_reports(const ScenarioConfig& cfg,
                                                 std::span<const RunResult> runs,
                                                 const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  const auto rows = aggregate(cfg, runs);
  const std::vector<std::pair<std::filesystem::path, std::string>> files{
      {out_dir / (cfg.name + "_table.csv"), table_csv(rows)},
      {out_dir / (cfg.name + "_summary.json"), summary_json(cfg, runs, rows)},
      {out_dir / (cfg.name + "_series.csv"), series_csv(cfg, runs)},
  };
  std::vector<std::filesystem::path> written;
  for (const auto& [path, body] : files) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f << body;
    written.push_back(path);
  }
  return written;
}

}  // namespace warnsim::scenario
