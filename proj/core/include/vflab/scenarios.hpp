#pragma once

#include "vflab/common.hpp"

#include <string>
#include <vector>

namespace vflab::scenarios {

/// One verified quantity inside a scenario report.
struct CheckRecord {
  std::string name;
  std::string paper_anchor;
  cplx computed{0.0, 0.0};
  cplx expected{0.0, 0.0};
  double tolerance = 0.0;
  bool pass = false;
};

struct Report {
  std::string scenario;
  std::string config;  // merged configuration, canonical JSON text
  std::vector<CheckRecord> checks;
  double seconds = 0.0;
  std::string version;

  bool all_pass() const;
};

struct ScenarioInfo {
  std::string name;
  std::string anchor;
  std::string summary;
};

/// Stable-ordered scenario catalog.
const std::vector<ScenarioInfo>& catalog();

/// Default configuration of a scenario as canonical JSON text.
std::string default_config(const std::string& scenario);

/// Run a scenario. `config_json` may be empty (defaults) or a JSON object
/// overriding a subset of the default keys. Unknown keys, type mismatches,
/// and out-of-range dimensions raise config_error with the field path.
/// Numerical failures (flow/transversality breakdowns) propagate; individual
/// check failures are recorded in the report instead of throwing.
Report run(const std::string& scenario, const std::string& config_json = "");

/// Self-describing report document. Timing is excluded when `with_timing` is
/// false so that reruns with one config compare byte-identical.
std::string to_json(const Report& report, bool with_timing = true);

/// Flat table export: scenario, check, computed_re, computed_im, expected_re,
/// expected_im, tol, pass.
std::string to_csv(const Report& report);

}  // namespace vflab::scenarios
