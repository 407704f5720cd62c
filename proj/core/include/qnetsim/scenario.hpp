#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qnetsim/device.hpp"

namespace qnetsim {

inline constexpr const char* kVersion = "0.1.0";

// One sweep axis: a scalar parameter path and the values it takes. The grid
// is the cartesian product of all axes, first axis slowest.
struct SweepAxis {
  std::string parameter;
  std::vector<double> values;
};

// Declarative description of one run: which experiment, parameter overrides,
// optional sweep, deterministic seed and (where meaningful) shot count.
struct ScenarioSpec {
  std::string experiment;
  std::map<std::string, double> numbers;   // numeric parameter overrides
  std::map<std::string, std::string> strings;
  std::vector<SweepAxis> sweep;
  std::string device_path;                  // empty: built-in default table
  std::string out_hint;                     // default output directory
  std::uint64_t seed = 1;
  std::int64_t shots = 0;
  std::string base_dir;                     // directory of the source file
};

ScenarioSpec parse_scenario(const std::string& json_text);
ScenarioSpec load_scenario(const std::string& path);
std::string serialize_scenario(const ScenarioSpec& spec);

// Registered experiment names, sorted. Unknown names are rejected with a
// message listing this set.
const std::vector<std::string>& registered_experiments();

// Scalar parameters an experiment accepts (and which a sweep may target).
const std::vector<std::string>& sweepable_parameters(const std::string& experiment);

struct RunOptions {
  std::string out_dir = "out";
  int jobs = 1;
  bool force = false;
  std::optional<std::uint64_t> seed;   // overrides the spec seed
};

struct RunSummary {
  std::string out_dir;
  std::string manifest_path;
  std::vector<std::string> artifacts;  // paths relative to out_dir
  double wall_time_s = 0;
};

// Execute the scenario and write its artifacts plus manifest.json into
// opts.out_dir. Sweeps fan out over a work queue (opts.jobs workers) with a
// per-point generator seeded from (seed, grid index); rows are gathered in
// grid order before writing, so artifact bytes do not depend on the worker
// count. Existing artifact paths abort the run unless opts.force is set.
RunSummary run_scenario(const ScenarioSpec& spec, const RunOptions& opts);

// Per-grid-point seed: decorrelates points while keeping them reproducible.
std::uint64_t grid_point_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace qnetsim
