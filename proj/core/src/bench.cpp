#include "mppic/bench.hpp"

#include <fstream>
#include <set>

#include <fmt/format.h>

#include "mppic/cases.hpp"
#include "mppic/error.hpp"
#include "mppic/verify.hpp"

namespace mppic {

BenchRun timed_run(const RunConfig& cfg_in, const std::string& assignment, int steps) {
  RunConfig cfg = cfg_in;
  cfg.devices = assignment;
  const SimulationSetup sim = make_simulation(cfg);
  StepRunner runner(sim.setup, sim.assignment, sim.mode, sim.simple);
  BenchRun out;
  out.final_state = sim.initial;
  TimeController tc = sim.time;
  runner.run_time_step(out.final_state, tc);
  for (int s = 0; s < steps; ++s) {
    const StepReport rep = runner.run_time_step(out.final_state, tc);
    out.timing.phases += rep.timing;
    out.timing.outer_iterations += rep.total_outer_iterations;
  }
  return out;
}

namespace {

int distinct_momentum_workers(const std::string& text) {
  const DeviceAssignment d = parse_assignment(text);
  return static_cast<int>(std::set<int>{d.u_dev, d.v_dev, d.w_dev}.size());
}

double min_digits(const SimState& ref, const SimState& other) {
  const Comparison cmp = compare_states(ref, other);
  return cmp.summary.compared > 0 ? cmp.summary.min : static_cast<double>(kDigitsMax);
}

std::size_t interior_cells(const RunConfig& cfg) {
  return static_cast<std::size_t>(cfg.grid.cells[0]) * cfg.grid.cells[1] * cfg.grid.cells[2];
}

}  // namespace

std::vector<ScalingRow> strong_scaling(const std::string& case_name, const RunConfig& cfg,
                                       const std::vector<std::string>& assignments, int steps) {
  std::vector<ScalingRow> rows;
  SimState baseline;
  for (const std::string& a : assignments) {
    BenchRun run = timed_run(cfg, a, steps);
    ScalingRow row;
    row.case_name = case_name;
    row.family = "strong";
    row.assignment = a;
    row.workers = distinct_momentum_workers(a);
    row.cells = interior_cells(cfg);
    row.parcels = run.final_state.parcels.size();
    row.steps = steps;
    row.timing = run.timing;
    if (rows.empty()) {
      baseline = run.final_state;
    } else {
      const double base = rows.front().timing.time_per_simple_iteration();
      const double mine = row.timing.time_per_simple_iteration();
      row.speedup = mine > 0.0 ? base / mine : 0.0;
      row.min_digits = min_digits(baseline, run.final_state);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<ScalingRow> weak_scaling(const std::string& case_name, const std::string& family,
                                     const std::vector<RunConfig>& configs, const std::string& assignment,
                                     int steps) {
  std::vector<ScalingRow> rows;
  for (const RunConfig& cfg : configs) {
    BenchRun run = timed_run(cfg, assignment, steps);
    ScalingRow row;
    row.case_name = case_name;
    row.family = family;
    row.assignment = assignment;
    row.workers = distinct_momentum_workers(assignment);
    row.cells = interior_cells(cfg);
    row.parcels = run.final_state.parcels.size();
    row.steps = steps;
    row.timing = run.timing;
    if (rows.empty()) {
      row.workload_ratio = 1.0;
    } else {
      const ScalingRow& first = rows.front();
      const double t_ratio = row.timing.time_per_simple_iteration() / first.timing.time_per_simple_iteration();
      const double w_ratio = static_cast<double>(row.cells) / static_cast<double>(first.cells);
      row.workload_ratio = t_ratio / w_ratio;
      row.speedup = first.timing.time_per_simple_iteration() / row.timing.time_per_simple_iteration();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<RunConfig> bed_weak_family(const std::vector<int>& factors, bool constant_parcels, Index3 base_cells,
                                       double base_omega) {
  std::vector<RunConfig> out;
  for (const int f : factors) {
    const Index3 cells{base_cells[0], base_cells[1], base_cells[2] * f};
    RunConfig c = desk_bed_config(cells, constant_parcels ? base_omega * f : base_omega);
    const double height = 0.12 * f;
    c.grid.extent = {0.12, 0.12, height};
    c.grid.regions[1] = {CellFlag::Outlet, {0.0, 0.0, height}, {0.12, 0.12, height}};
    c.solids.bed = {{0.0, 0.0, 0.0}, {0.12, 0.12, height / 3.0}};
    c.output.probes = {{0.06, 0.06, height / 6.0}};
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<RunConfig> bfs_weak_family(const std::vector<int>& factors, Index3 base_cells) {
  std::vector<RunConfig> out;
  for (const int f : factors) {
    RunConfig c = bfs_config({base_cells[0], base_cells[1], base_cells[2] * f});
    const double length = 0.98 * f;
    c.grid.extent[2] = length;
    c.grid.regions[2] = {CellFlag::Outlet, {0.0, 0.0, length}, {0.098, 0.049, length}};
    out.push_back(std::move(c));
  }
  return out;
}

std::string scaling_csv_header() {
  return "case,family,assignment,workers,cells,parcels,steps,outer_iterations,simple_time_s,"
         "time_per_iteration_s,speedup,workload_ratio,min_digits";
}

void write_scaling_csv(const std::vector<ScalingRow>& rows, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << scaling_csv_header() << "\n";
  for (const ScalingRow& r : rows) {
    out << fmt::format("{},{},{},{},{},{},{},{},{:.9g},{:.9g},{:.6g},{:.6g},{:.6g}\n", r.case_name, r.family,
                       r.assignment, r.workers, r.cells, r.parcels, r.steps, r.timing.outer_iterations,
                       r.timing.phases.simple(), r.timing.time_per_simple_iteration(), r.speedup, r.workload_ratio,
                       r.min_digits);
  }
}

double PowerModel::rating(const std::string& name) const {
  const auto it = ratings.find(name);
  if (it == ratings.end()) throw ConfigError("unknown resource \"" + name + "\"");
  return it->second;
}

PowerModel default_power_model() {
  PowerModel m;
  m.ratings["cpu_node"] = kCpuNodeWatts;
  m.ratings["dgx_base"] = kDgxBaseWatts;
  m.ratings["a100"] = kAcceleratorWatts;
  return m;
}

double accelerator_box_watts(const PowerModel& model, int used, int installed) {
  if (used < 0 || used > installed) throw ConfigError("accelerator count out of range");
  return model.rating("dgx_base") - (installed - used) * model.rating("a100");
}

double energy_estimate(const PowerModel& model, const std::vector<ResourceUse>& use, double wall_seconds) {
  double watts = 0.0;
  for (const ResourceUse& r : use) watts += model.rating(r.name) * r.count;
  return watts * wall_seconds;
}

}  // namespace mppic
