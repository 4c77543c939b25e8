#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "mppic/eulerian.hpp"
#include "mppic/fields.hpp"
#include "mppic/grid.hpp"
#include "mppic/parcels.hpp"
#include "mppic/scheduler.hpp"

namespace mppic {

struct SolidsConfig {
  bool enabled = false;
  double d_p = 400e-6;
  double rho_p = 2000.0;
  double omega = 10.0;
  double eps_p0 = 0.58;
  Box bed{};
  std::uint64_t seed = 1;
  StressParams stress;
  WallModel wall;

  bool operator==(const SolidsConfig&) const = default;
};

struct OutputConfig {
  std::string dir = "out";
  double dump_interval = 0.0;
  std::vector<Vec3> probes;
  double probe_interval = 1e-2;

  bool operator==(const OutputConfig&) const = default;
};

/// Everything needed to set up and run one simulation.
///
/// Text form: `[section]` headers followed by `key = value` lines; `#` starts a comment.
/// Vectors are whitespace-separated. `grid.region` and `output.probe` may repeat.
struct RunConfig {
  GridConfig grid;
  GasProps gas;
  SolidsConfig solids;
  BoundarySpec bc;
  SimpleConfig simple;
  TimeController time;
  double t_end = 0.0;
  double mean_discard = 0.0;
  std::string devices = "111[1]";
  CouplingMode coupling = CouplingMode::Explicit;
  Vec3 initial_velocity{};
  OutputConfig output;

  bool operator==(const RunConfig&) const = default;
};

/// Throws ConfigError (with the offending line where there is one).
RunConfig parse_config_text(std::string_view text);
RunConfig parse_config(const std::filesystem::path& path);

/// Validates cross-field constraints. Throws ConfigError.
void validate(const RunConfig& cfg);

/// Effective configuration in the text form; parses back to an equal RunConfig.
std::string echo_config(const RunConfig& cfg);

/// Builds mesh, parcels and initial state.
SimulationSetup make_simulation(const RunConfig& cfg);

}  // namespace mppic
