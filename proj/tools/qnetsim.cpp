#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "qnetsim/device.hpp"
#include "qnetsim/io.hpp"
#include "qnetsim/report.hpp"
#include "qnetsim/scenario.hpp"

namespace {

int jobs_from_env() {
  const char* env = std::getenv("QNETSIM_JOBS");
  if (!env) return 1;
  int v = std::atoi(env);
  return v > 0 ? v : 1;
}

int cmd_run(const std::string& scenario_path, const std::string& out_flag,
            bool seed_set, std::uint64_t seed, int jobs_flag, bool force) {
  qnetsim::ScenarioSpec spec = qnetsim::load_scenario(scenario_path);
  qnetsim::RunOptions opts;
  if (!out_flag.empty())
    opts.out_dir = out_flag;
  else if (!spec.out_hint.empty())
    opts.out_dir = spec.out_hint;
  opts.jobs = jobs_flag > 0 ? jobs_flag : jobs_from_env();
  opts.force = force;
  if (seed_set) opts.seed = seed;

  qnetsim::RunSummary summary = qnetsim::run_scenario(spec, opts);
  std::cout << spec.experiment << ": " << summary.artifacts.size()
            << " artifact(s) in " << summary.out_dir << " ("
            << summary.wall_time_s << " s)\n";
  for (const std::string& a : summary.artifacts) std::cout << "  " << a << "\n";
  return 0;
}

int cmd_report(const std::string& dir) {
  qnetsim::Report report = qnetsim::emit_report(dir);
  std::cout << report.text;
  return report.failures > 0 ? 2 : 0;
}

int cmd_validate(const std::string& path) {
  const std::string text = qnetsim::read_text_file(path);
  nlohmann::json j = nlohmann::json::parse(text);
  if (j.is_object() && j.contains("experiment")) {
    qnetsim::ScenarioSpec spec = qnetsim::parse_scenario(text);
    std::cout << "valid scenario: experiment " << spec.experiment << ", "
              << spec.sweep.size() << " sweep axis(es), seed " << spec.seed
              << "\n";
  } else {
    qnetsim::DeviceConfig dev = qnetsim::parse_device_config(text);
    std::cout << "valid device config: " << dev.qubits.size() << " qubits, "
              << dev.mode_count << " channel modes, FSR " << dev.fsr_hz / 1e6
              << " MHz\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"two-node superconducting network simulator"};
  app.set_version_flag("--version", qnetsim::kVersion);
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "execute a scenario file");
  std::string scenario_path, out_flag;
  std::uint64_t seed = 0;
  int jobs_flag = 0;
  bool force = false;
  run->add_option("scenario", scenario_path, "scenario JSON file")->required();
  run->add_option("--out", out_flag, "output directory");
  run->add_option("--seed", seed, "override the scenario seed");
  run->add_option("--jobs", jobs_flag,
                  "parallel grid workers (QNETSIM_JOBS as fallback)");
  run->add_flag("--force", force, "overwrite existing artifacts");

  auto* rep = app.add_subcommand("report",
                                 "compare run artifacts against reference values");
  std::string report_dir;
  rep->add_option("dir", report_dir, "run directory (or parent of several)")
      ->required();

  auto* val = app.add_subcommand("validate", "validate a device or scenario file");
  std::string config_path;
  val->add_option("config", config_path, "JSON file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed())
      return cmd_run(scenario_path, out_flag, run->count("--seed") > 0, seed,
                     jobs_flag, force);
    if (rep->parsed()) return cmd_report(report_dir);
    if (val->parsed()) return cmd_validate(config_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
