#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "warnsim/metrics/metrics.hpp"
#include "warnsim/scenario/config.hpp"
#include "warnsim/sim/simulator.hpp"

namespace warnsim::scenario {

/// One simulation: a protocol, a timer or assessment variant, a node
/// population (vehicles per km^2, or pedestrian devices) and a seed.
struct RunSpec {
  Protocol protocol = Protocol::AddVod;
  std::string variant = "default";
  double density = 0.0;  // vehicles/km^2 or pedestrian count for CTD
  std::uint64_t seed = 1;
  dissemination::TimerConfig timer;
  double p_a = 0.0;
  int alert_senders = 1;
};

/// Bookkeeping checked by the property tests. Collected on every run.
struct PropertyLog {
  std::uint64_t forwards = 0;                 // relayed copies (not originations)
  std::uint64_t forwards_without_receipt = 0;  // must stay 0
  std::uint64_t max_relays_per_message = 0;   // per node and message (or alert class)
  std::uint64_t ttl_hops = 0;
  std::uint64_t ttl_violations = 0;           // hop whose TTL did not drop by one
  std::uint64_t weight_updates = 0;
  std::uint64_t weight_violations = 0;        // weights off the simplex or under the floor
  std::uint64_t reply_messages = 0;
  bool clock_monotone = true;
};

struct RunResult {
  RunSpec spec;
  metrics::MetricsLedger ledger;
  std::uint64_t nonconverged = 0;  // forwarding-game solves flagged as not converged
  sim::TraceDigest digest;
  PropertyLog props;
  std::size_t node_count = 0;
  /// Scalar outcomes keyed "metric" or "metric@ring" (rings by upper bound).
  std::map<std::string, double> values;
};

/// Expands the config into runs ordered by density, protocol, variant, seed.
std::vector<RunSpec> expand_runs(const ScenarioConfig& cfg);

/// Executes one run. Throws on missing input files or handler failures.
RunResult run_scenario(const ScenarioConfig& cfg, const RunSpec& spec);

/// Executes runs on up to `jobs` threads; results keep the order of `specs`.
std::vector<RunResult> run_sweep(const ScenarioConfig& cfg, std::span<const RunSpec> specs,
                                 int jobs);

}  // namespace warnsim::scenario
