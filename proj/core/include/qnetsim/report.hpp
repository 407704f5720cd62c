#pragma once

#include <string>
#include <vector>

namespace qnetsim {

// One published value the toolkit is expected to reproduce. `field` names a
// scalar in the experiment's summary.json; values inside [lo, hi] pass.
struct ReferenceEntry {
  std::string experiment;
  std::string field;
  std::string quantity;  // human-readable label
  double target = 0;
  double lo = 0;
  double hi = 0;
  std::string citation;
};

const std::vector<ReferenceEntry>& reference_table();

struct Report {
  std::string text;
  int rows = 0;
  int failures = 0;
};

// Compare every run found under `artifacts_dir` (a single run directory or a
// directory of run directories, identified by their manifest.json) against
// the reference table. Out-of-band values are marked FAIL with the delta
// from the reference target. Throws when no artifacts are found.
Report emit_report(const std::string& artifacts_dir);

}  // namespace qnetsim
