// Command-line front end: run, sweep, list-scenarios, show-config, check.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hcvrd/hcvrd.hpp"

namespace {

enum ExitCode : int { kOk = 0, kUsage = 1, kConfig = 2, kSolver = 3, kMonitor = 4 };

struct Source {
  std::string config;
  std::string scenario;

  void attach(CLI::App* app) {
    auto* c = app->add_option("--config", config, "key=value scenario file");
    auto* s = app->add_option("--scenario", scenario, "built-in scenario name");
    c->excludes(s);
  }
  hcvrd::Scenario load() const {
    if (!config.empty()) return hcvrd::load_config(config);
    if (!scenario.empty()) return hcvrd::builtin_scenario(scenario);
    throw hcvrd::ConfigError("scenario", "one of --config or --scenario is required");
  }
};

std::vector<double> parse_values(const std::string& list, const std::string& range) {
  std::vector<double> out;
  if (!list.empty()) {
    std::stringstream ss(list);
    for (std::string item; std::getline(ss, item, ',');)
      out.push_back(hcvrd::parse_double(item, "values"));
  }
  if (!range.empty()) {
    // from:to:count, inclusive
    std::stringstream ss(range);
    std::string a, b, n;
    if (!std::getline(ss, a, ':') || !std::getline(ss, b, ':') || !std::getline(ss, n))
      throw hcvrd::ConfigError("range", "range must be from:to:count");
    const double lo = hcvrd::parse_double(a, "range");
    const double hi = hcvrd::parse_double(b, "range");
    const auto count = static_cast<std::size_t>(hcvrd::parse_double(n, "range"));
    if (count < 2) throw hcvrd::ConfigError("range", "range count must be >= 2");
    for (std::size_t i = 0; i < count; ++i)
      out.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1));
  }
  if (out.empty()) throw hcvrd::ConfigError("values", "no sweep values given");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reaction-diffusion within-host HCV model: simulation and threshold analysis"};
  app.require_subcommand(1);

  auto* run_cmd = app.add_subcommand("run", "integrate a scenario and write CSV + report");
  Source run_src;
  run_src.attach(run_cmd);
  std::optional<std::size_t> n_cells;
  std::string dt_text;
  std::optional<double> t_end;
  std::string out_dir = "out";
  run_cmd->add_option("--n-cells", n_cells, "grid nodes (>= 3)");
  run_cmd->add_option("--dt", dt_text, "time step or 'auto'");
  run_cmd->add_option("--t-end", t_end, "final time in days");
  run_cmd->add_option("--out", out_dir, "output directory")->capture_default_str();

  auto* sweep_cmd = app.add_subcommand("sweep", "threshold analysis over one parameter");
  Source sweep_src;
  sweep_src.attach(sweep_cmd);
  std::string key, values, range, sweep_out;
  sweep_cmd->add_option("--key", key, "parameter name")->required();
  sweep_cmd->add_option("--values", values, "comma-separated values");
  sweep_cmd->add_option("--range", range, "from:to:count (inclusive)");
  sweep_cmd->add_option("--out", sweep_out, "CSV path (default: stdout)");

  auto* list_cmd = app.add_subcommand("list-scenarios", "list built-in scenarios");

  auto* show_cmd = app.add_subcommand("show-config", "print a scenario as a config file");
  Source show_src;
  show_src.attach(show_cmd);

  auto* check_cmd = app.add_subcommand("check", "run the randomized invariant suite");
  std::uint64_t seed = 20240607;
  std::size_t samples = 1000;
  check_cmd->add_option("--seed", seed)->capture_default_str();
  check_cmd->add_option("--samples", samples)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*run_cmd) {
      auto s = run_src.load();
      if (n_cells) s.n_cells = *n_cells;
      if (t_end) s.solver.t_end = *t_end;
      if (!dt_text.empty()) {
        if (dt_text == "auto")
          s.solver.dt.reset();
        else
          s.solver.dt = hcvrd::parse_double(dt_text, "dt");
      }
      const auto report = hcvrd::run_scenario(s, out_dir);
      hcvrd::write_report(std::cout, report);
      if (!report.completed) return kSolver;
      if (!report.monitors_ok()) return kMonitor;
      return kOk;
    }
    if (*sweep_cmd) {
      const auto base = sweep_src.load();
      const auto rows = hcvrd::sweep(base, key, parse_values(values, range));
      if (sweep_out.empty()) {
        hcvrd::write_sweep_csv(std::cout, key, rows);
      } else {
        std::ofstream os(sweep_out, std::ios::binary);
        if (!os) throw hcvrd::ConfigError("out", "cannot write '" + sweep_out + "'");
        hcvrd::write_sweep_csv(os, key, rows);
      }
      return kOk;
    }
    if (*list_cmd) {
      for (const auto& s : hcvrd::builtin_scenarios())
        std::cout << s.name << "  R0=" << hcvrd::format_double(hcvrd::basic_reproduction_number(s.params))
                  << "  t_end=" << hcvrd::format_double(s.solver.t_end) << '\n';
      return kOk;
    }
    if (*show_cmd) {
      std::cout << hcvrd::emit_config(show_src.load());
      return kOk;
    }
    if (*check_cmd) {
      bool all = true;
      for (const auto& r : hcvrd::run_invariant_checks(seed, samples)) {
        std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << '\n';
        all = all && r.passed;
      }
      return all ? kOk : kMonitor;
    }
  } catch (const hcvrd::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const hcvrd::DomainError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const hcvrd::SolverError& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return kSolver;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kSolver;
  }
  return kUsage;
}
