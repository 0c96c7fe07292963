#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "warnsim/scenario/config.hpp"
#include "warnsim/scenario/report.hpp"
#include "warnsim/scenario/run.hpp"

namespace fs = std::filesystem;
using namespace warnsim::scenario;

namespace {

// A bare preset name such as "leganes-add" resolves to presets/<name>.json.
fs::path resolve_config(const std::string& arg) {
  fs::path p(arg);
  if (fs::exists(p)) return p;
  fs::path preset = fs::path(WARNSIM_PRESET_DIR) / (arg + ".json");
  if (p.extension().empty() && fs::exists(preset)) return preset;
  return p;
}

int print_errors(const fs::path& path, const std::vector<std::string>& errors) {
  for (const auto& e : errors) std::cerr << path.string() << ": " << e << '\n';
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"warnsim: warning dissemination simulator"};
  app.require_subcommand(1);

  std::string run_config, seeds, out_dir = "results";
  bool strict = false;
  int jobs = 1;
  auto* run = app.add_subcommand("run", "Run every (density, protocol, variant, seed) in a config");
  run->add_option("config", run_config, "Config file or preset name")->required();
  run->add_option("--seeds", seeds, "Override seeds: 3, 1,4,9 or 1-10");
  run->add_option("--out", out_dir, "Report directory");
  run->add_flag("--strict", strict, "Fail on forwarding-game non-convergence");
  run->add_option("--jobs", jobs, "Parallel runs")->check(CLI::PositiveNumber);

  std::string validate_config;
  auto* val = app.add_subcommand("validate", "Check a config and list every violation");
  val->add_option("config", validate_config, "Config file or preset name")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (val->parsed()) {
      const auto path = resolve_config(validate_config);
      const auto res = load_config(path);
      if (!res.ok()) return print_errors(path, res.errors);
      std::cout << "ok\n";
      return 0;
    }

    const auto path = resolve_config(run_config);
    auto res = load_config(path);
    if (!res.ok()) return print_errors(path, res.errors);
    ScenarioConfig cfg = std::move(res.config);
    if (!seeds.empty()) {
      cfg.seeds = parse_seed_list(seeds);
      if (auto errs = validate(cfg); !errs.empty()) return print_errors(path, errs);
    }
    cfg.strict = cfg.strict || strict;

    const auto specs = expand_runs(cfg);
    std::cerr << "running " << specs.size() << " simulations on " << jobs << " thread(s)\n";
    const auto runs = run_sweep(cfg, specs, jobs);
    for (const auto& p : write_reports(cfg, runs, out_dir)) std::cout << p.string() << '\n';

    std::uint64_t nonconverged = 0;
    for (const auto& r : runs) nonconverged += r.nonconverged;
    if (nonconverged > 0) {
      std::cerr << nonconverged << " forwarding-game solve(s) did not converge\n";
      if (cfg.strict) return 3;
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
