// mppic command-line driver.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "mppic/bench.hpp"
#include "mppic/cases.hpp"
#include "mppic/config.hpp"
#include "mppic/error.hpp"
#include "mppic/probe.hpp"
#include "mppic/scheduler.hpp"
#include "mppic/spectrum.hpp"
#include "mppic/verify.hpp"

namespace fs = std::filesystem;
using namespace mppic;

namespace {

enum Exit { kOk = 0, kUsage = 1, kRuntime = 2, kStepFailure = 3 };

struct RunArgs {
  std::string config;
  std::string devices;
  std::string coupling;
  std::string out;
  double until = -1.0;
};

int cmd_run(const RunArgs& a) {
  RunConfig cfg = parse_config(a.config);
  if (!a.devices.empty()) cfg.devices = a.devices;
  if (!a.coupling.empty()) cfg.coupling = parse_coupling(a.coupling);
  if (!a.out.empty()) cfg.output.dir = a.out;
  if (a.until >= 0.0) cfg.t_end = a.until;
  validate(cfg);

  const SimulationSetup sim = make_simulation(cfg);
  const fs::path dir = cfg.output.dir;
  if (!dir.empty()) {
    fs::create_directories(dir);
    std::ofstream(dir / "config.echo.ini") << echo_config(cfg);
  }
  spdlog::info("{} parcels, {} cells, devices {}, {} coupling", sim.initial.parcels.size(),
               sim.setup.mesh.grid.interior_count(), sim.assignment.text(), to_string(sim.mode));

  const SimulationResult res = run_simulation(sim, cfg.t_end);
  fmt::print("steps {}  rejected {}  floor accepts {}  outer iterations {}\n", res.steps,
             res.rejected_attempts, res.floor_accepts, res.total_outer_iterations);
  fmt::print("t = {:.6g} s  dt = {:.3e} s  wall {:.3f} s\n", res.final_state.time, res.time.dt,
             res.timing.total());
  if (!res.dp_values.empty()) {
    fmt::print("pressure drop: last {:.6g} Pa", res.dp_values.back());
    if (res.final_state.time > cfg.mean_discard)
      fmt::print("  mean after {:g} s {:.6g} Pa", cfg.mean_discard, res.mean_pressure_drop(cfg.mean_discard));
    fmt::print("\n");
  }
  return kOk;
}

int cmd_compare(const std::string& a, const std::string& b, const std::string& csv) {
  const Comparison cmp = compare_dumps(a, b);
  for (const DigitsHistogram& h : cmp.histograms) {
    if (h.compared() == 0) {
      fmt::print("{:>6}  all reference values zero ({})\n", h.variable, h.zero_reference);
      continue;
    }
    fmt::print("{:>6} ", h.variable);
    for (int d : h.occupied()) fmt::print(" {}:{}", d, h.bin(d));
    fmt::print("\n");
  }
  fmt::print("digits min {:g}  median {:g}  mode {}  over {} values\n", cmp.summary.min, cmp.summary.median,
             cmp.summary.mode, cmp.summary.compared);
  if (!csv.empty()) write_histogram_csv(cmp, csv);
  return kOk;
}

struct BenchArgs {
  std::string kind;
  std::string case_name = "bfs";
  std::vector<std::string> assignments{"111[1]", "123[1]"};
  std::string assignment = "111[1]";
  std::vector<int> factors{1, 2, 4};
  bool constant_parcels = false;
  int steps = 3;
  std::string csv;
};

int cmd_bench(const BenchArgs& a) {
  std::vector<ScalingRow> rows;
  if (a.kind == "strong") {
    const RunConfig cfg = a.case_name == "bfs" ? bfs_config() : desk_bed_config();
    rows = strong_scaling(a.case_name, cfg, a.assignments, a.steps);
  } else {
    const std::string family = a.case_name == "bfs"
                                   ? "weak"
                                   : (a.constant_parcels ? "weak-constant-parcels" : "weak-variable-parcels");
    const auto configs = a.case_name == "bfs" ? bfs_weak_family(a.factors) : bed_weak_family(a.factors, a.constant_parcels);
    rows = weak_scaling(a.case_name, family, configs, a.assignment, a.steps);
  }
  fmt::print("{}\n", scaling_csv_header());
  for (const ScalingRow& r : rows)
    fmt::print("{},{},{},{},{},{},{},{},{:.6g},{:.6g},{:.4g},{:.4g},{:g}\n", r.case_name, r.family, r.assignment,
               r.workers, r.cells, r.parcels, r.steps, r.timing.outer_iterations, r.timing.phases.simple(),
               r.timing.time_per_simple_iteration(), r.speedup, r.workload_ratio, r.min_digits);
  if (!a.csv.empty()) write_scaling_csv(rows, a.csv);
  return kOk;
}

int cmd_spectrum(const std::string& path, bool direct, const std::string& out) {
  const Spectrum s = spectrum(read_probe_csv(path), direct);
  fmt::print("dominant frequency {:.4g} Hz (bin {}, magnitude {:.6g})\n", s.dominant, s.dominant_bin,
             s.magnitudes[s.dominant_bin]);
  if (!out.empty()) {
    std::ofstream f(out);
    if (!f) throw Error("cannot write " + out);
    f << "frequency,magnitude\n";
    for (std::size_t k = 0; k < s.frequencies.size(); ++k)
      f << fmt::format("{:.17g},{:.17g}\n", s.frequencies[k], s.magnitudes[k]);
  }
  return kOk;
}

int cmd_probe_extract(const std::string& config, const std::vector<double>& point,
                      const std::vector<std::string>& dumps, const std::string& out) {
  const RunConfig cfg = parse_config(config);
  const Mesh mesh = build_grid(cfg.grid);
  const Vec3 pos{point[0], point[1], point[2]};
  ProbeSeries s;
  s.point = pos;
  s.cell = probe_cell(mesh.grid, pos);
  for (const std::string& d : dumps) {
    const LoadedDump ld = load_state(d, &mesh.grid);
    if (!s.times.empty() && !(ld.header.time > s.times.back()))
      throw Error("dump times must increase: " + d);
    s.times.push_back(ld.header.time);
    s.values.push_back(ld.state.fields.eps_g[s.cell]);
  }
  if (out.empty()) {
    fmt::print("time,value\n");
    for (std::size_t i = 0; i < s.times.size(); ++i) fmt::print("{:.17g},{:.17g}\n", s.times[i], s.values[i]);
  } else {
    write_probe_csv(s, out);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MP-PIC gas-solid solver with equation-parallel SIMPLE"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "run a case from a config file");
  run_cmd->add_option("--config", run.config, "case file")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--devices", run.devices, "assignment string, e.g. 123[4]");
  run_cmd->add_option("--coupling", run.coupling, "explicit or implicit")
      ->check(CLI::IsMember({"explicit", "implicit"}));
  run_cmd->add_option("--until", run.until, "end time [s]")->check(CLI::NonNegativeNumber);
  run_cmd->add_option("--out", run.out, "output directory");

  std::string cmp_a, cmp_b, cmp_csv;
  auto* cmp_cmd = app.add_subcommand("verify-compare", "digits-matching histograms of two dumps");
  cmp_cmd->add_option("reference", cmp_a)->required()->check(CLI::ExistingFile);
  cmp_cmd->add_option("other", cmp_b)->required()->check(CLI::ExistingFile);
  cmp_cmd->add_option("--out", cmp_csv, "histogram CSV");

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "strong or weak scaling tables");
  bench_cmd->add_option("kind", bench.kind)->required()->check(CLI::IsMember({"strong", "weak"}));
  bench_cmd->add_option("--case", bench.case_name)->check(CLI::IsMember({"bfs", "bed"}));
  bench_cmd->add_option("--assignments", bench.assignments, "strong: assignments, baseline first");
  bench_cmd->add_option("--devices", bench.assignment, "weak: assignment");
  bench_cmd->add_option("--factors", bench.factors, "weak: size factors")->check(CLI::PositiveNumber);
  bench_cmd->add_flag("--constant-parcels", bench.constant_parcels, "weak bed: fixed parcel count");
  bench_cmd->add_option("--steps", bench.steps, "measured steps")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--csv", bench.csv, "output CSV");

  std::string spec_in, spec_out;
  bool direct = false;
  auto* spec_cmd = app.add_subcommand("spectrum", "magnitude spectrum of a probe series");
  spec_cmd->add_option("series", spec_in, "CSV with time,value")->required()->check(CLI::ExistingFile);
  spec_cmd->add_flag("--direct", direct, "use the direct DFT");
  spec_cmd->add_option("--out", spec_out, "spectrum CSV");

  std::string pe_config, pe_out;
  std::vector<double> pe_point;
  std::vector<std::string> pe_dumps;
  auto* pe_cmd = app.add_subcommand("probe-extract", "eps_g at a point from a sequence of dumps");
  pe_cmd->add_option("--config", pe_config, "case file")->required()->check(CLI::ExistingFile);
  pe_cmd->add_option("--point", pe_point, "x y z [m]")->required()->expected(3);
  pe_cmd->add_option("--out", pe_out, "output CSV");
  pe_cmd->add_option("dumps", pe_dumps)->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    if (*run_cmd) return cmd_run(run);
    if (*cmp_cmd) return cmd_compare(cmp_a, cmp_b, cmp_csv);
    if (*bench_cmd) return cmd_bench(bench);
    if (*spec_cmd) return cmd_spectrum(spec_in, direct, spec_out);
    if (*pe_cmd) return cmd_probe_extract(pe_config, pe_point, pe_dumps, pe_out);
  } catch (const StepFailure& e) {
    spdlog::error("{}", e.what());
    return kStepFailure;
  } catch (const ConfigError& e) {
    spdlog::error("{}", e.what());
    return kUsage;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kRuntime;
  }
  return kUsage;
}
