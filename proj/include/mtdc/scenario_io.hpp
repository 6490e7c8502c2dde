#ifndef MTDC_SCENARIO_IO_HPP
#define MTDC_SCENARIO_IO_HPP

#include <istream>
#include <string>
#include <vector>

#include "mtdc/sim.hpp"

namespace mtdc {

/// Scenario plus the informational notices produced while loading it
/// (defaulted gains, ignored reactances, unknown keys in lax mode).
struct ScenarioLoad {
  Scenario scenario;
  std::vector<std::string> notices;
};

/// Parses the INI-like scenario format:
///
///   [grid]
///   nodes 3
///   line 1 2 0.0015 0.01      # from to resistance_pu [reactance_pu]
///
///   [params]
///   inertia 10 10 10          # per-node vectors, one entry per node
///   ...
///   omega_ref 1               # scalars
///
///   [disturbance]
///   initial 0 0 0             # optional baseline, default zero
///   step 1 -0.1 0 0           # time_s then one value per node
///
///   [sim]
///   t_end_s 40
///   dt_max_s 0.05
///   model linear              # or nonlinear
///
/// '#' starts a comment, node indices are 1-based, keys take
/// space-separated values. Missing optional keys fall back to defaults
/// (v_nom 1, omega_ref 1, v_ref = v_nom everywhere, zero nominal powers,
/// k_v 10 with a notice, linear model, 10 ms output grid). Errors carry
/// the offending line number. Unknown keys or sections are errors in
/// strict mode and notices otherwise. The loaded scenario is validated.
ScenarioLoad load_scenario(std::istream& in, bool strict = true);
ScenarioLoad load_scenario_file(const std::string& path, bool strict = true);

/// Canonical text form; load_scenario(serialize_scenario(s)) reproduces s
/// exactly, including whether k_v was explicit.
std::string serialize_scenario(const Scenario& scenario);

}  // namespace mtdc

#endif  // MTDC_SCENARIO_IO_HPP
