#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "mppic/config.hpp"
#include "mppic/scheduler.hpp"

namespace mppic {

/// Per-phase wall time and outer iterations of a measured run.
struct TimingRecord {
  PhaseTiming phases;
  int outer_iterations = 0;

  /// Time inside the SIMPLE loop divided by the number of SIMPLE iterations.
  double time_per_simple_iteration() const {
    return outer_iterations > 0 ? phases.simple() / outer_iterations : 0.0;
  }
};

struct ScalingRow {
  std::string case_name;
  std::string family;        ///< "strong", "weak-constant-parcels" or "weak-variable-parcels"
  std::string assignment;
  int workers = 1;           ///< distinct momentum workers
  std::size_t cells = 0;     ///< interior cells
  std::size_t parcels = 0;
  int steps = 0;
  TimingRecord timing;
  double speedup = 1.0;      ///< against the first row of the same case and family
  double workload_ratio = 0.0;  ///< weak scaling: time ratio over cell ratio against the first row
  double min_digits = 16.0;  ///< equivalence against the first row's final state
};

/// Runs `steps` fixed-size steps after one excluded warmup step.
struct BenchRun {
  TimingRecord timing;
  SimState final_state;
};
BenchRun timed_run(const RunConfig& cfg, const std::string& assignment, int steps);

/// Fixed problem, one run per assignment; the first assignment is the baseline.
std::vector<ScalingRow> strong_scaling(const std::string& case_name, const RunConfig& cfg,
                                       const std::vector<std::string>& assignments, int steps);

/// Growing problems at a fixed assignment. Rows follow the order of `configs`.
std::vector<ScalingRow> weak_scaling(const std::string& case_name, const std::string& family,
                                     const std::vector<RunConfig>& configs, const std::string& assignment,
                                     int steps);

/// Bed family for weak scaling: the desk bed stretched along z by `factor` layers of cells.
/// With `constant_parcels` the weight grows with the bed so the parcel count stays fixed;
/// otherwise the parcel-to-cell ratio stays fixed.
std::vector<RunConfig> bed_weak_family(const std::vector<int>& factors, bool constant_parcels,
                                       Index3 base_cells = {12, 12, 12}, double base_omega = 3000.0);

/// BFS channel family stretched along z.
std::vector<RunConfig> bfs_weak_family(const std::vector<int>& factors, Index3 base_cells = {10, 5, 50});

void write_scaling_csv(const std::vector<ScalingRow>& rows, const std::filesystem::path& path);
std::string scaling_csv_header();

/// Named power ratings [W].
struct PowerModel {
  std::map<std::string, double> ratings;

  double rating(const std::string& name) const;
};

inline constexpr double kCpuNodeWatts = 800.0 + 6.7;  ///< node plus network share
inline constexpr double kDgxBaseWatts = 6500.0;
inline constexpr double kAcceleratorWatts = 400.0;

/// cpu_node, dgx_base, a100.
PowerModel default_power_model();

/// Effective rating of a DGX-class box using `used` of its 8 accelerators: the full-box
/// figure minus the idle accelerators' share.
double accelerator_box_watts(const PowerModel& model, int used, int installed = 8);

struct ResourceUse {
  std::string name;
  double count = 1.0;
};

/// Sum of rating x count x wall time [J]. Throws ConfigError for unknown resources.
double energy_estimate(const PowerModel& model, const std::vector<ResourceUse>& use, double wall_seconds);

/// 1 - E_a / E_b.
inline double energy_savings(double e_a, double e_b) { return 1.0 - e_a / e_b; }

}  // namespace mppic
