#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <memory>
#include <future>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "mppic/drag.hpp"
#include "mppic/eulerian.hpp"
#include "mppic/fields.hpp"
#include "mppic/grid.hpp"
#include "mppic/parcels.hpp"
#include "mppic/probe.hpp"

namespace mppic {

inline constexpr int kMaxWorkers = 8;

/// Worker mapping written as "UVW[P...]", e.g. "234[1234]". The PIC workload always runs on
/// worker 1.
struct DeviceAssignment {
  int u_dev = 1;
  int v_dev = 1;
  int w_dev = 1;
  std::vector<int> p_devs{1};
  int pic_dev = 1;

  int momentum_dev(int axis) const { return axis == 0 ? u_dev : (axis == 1 ? v_dev : w_dev); }
  /// Worker running the pressure solve (first entry of the bracket list).
  int pressure_dev() const { return p_devs.front(); }
  int max_id() const;
  std::string text() const;
  bool operator==(const DeviceAssignment&) const = default;
};

/// Throws ConfigError for malformed strings or ids above `available_workers`.
DeviceAssignment parse_assignment(std::string_view text, int available_workers = kMaxWorkers);

enum class CouplingMode { Explicit, Implicit };

const char* to_string(CouplingMode mode);
CouplingMode parse_coupling(std::string_view text);

enum class Phase {
  PicDeposit,    ///< deposition and drag before the outer loop
  DragRefresh,   ///< implicit coupling only
  Barrier,
  Momentum,      ///< U, V, W assemble and solve, concurrently
  Pressure,
  Correct,       ///< corrector and residuals
  PicAdvance,
  AdaptDt,
};

const char* to_string(Phase phase);

/// Barrier schedule of one time step.
struct StepPlan {
  std::vector<Phase> before;  ///< run once before the outer loop
  std::vector<Phase> outer;   ///< run once per SIMPLE iteration
  std::vector<Phase> after;   ///< run once after convergence
};

StepPlan make_step_plan(CouplingMode mode);

/// In-process execution units, each with its own FIFO queue. Tasks submitted to one worker
/// run in submission order.
class WorkerPool {
 public:
  explicit WorkerPool(int workers);
  ~WorkerPool();
  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  int size() const { return static_cast<int>(workers_.size()); }
  /// `worker` is 1-based.
  std::future<void> submit(int worker, std::function<void()> task);

 private:
  struct Worker {
    std::mutex mutex;
    std::condition_variable cv;
    std::deque<std::packaged_task<void()>> queue;
    bool stop = false;
    std::thread thread;
  };
  std::vector<std::unique_ptr<Worker>> workers_;
};

/// Records which worker touched which buffer in which inter-barrier phase.
class AccessLog {
 public:
  struct Event {
    int epoch = 0;
    int worker = 0;
    std::string buffer;
    bool write = false;
  };
  struct Conflict {
    int epoch = 0;
    std::string buffer;
    int writer = 0;
    int other = 0;
  };

  void barrier();
  void record(int worker, std::string buffer, bool write);
  std::vector<Event> events() const;
  /// Buffers written by one worker and read or written by another worker in the same epoch.
  std::vector<Conflict> conflicts() const;

 private:
  mutable std::mutex mutex_;
  int epoch_ = 0;
  std::vector<Event> events_;
};

struct CaseSetup {
  Mesh mesh;
  GasProps gas;
  BoundarySpec bc;
  StressParams stress;
  WallModel wall;
};

struct SimState {
  FieldState fields;
  ParcelSet parcels;
  double time = 0.0;

  bool operator==(const SimState&) const = default;
};

/// Wall time per phase [s].
struct PhaseTiming {
  double pic_deposit = 0.0;
  double drag_refresh = 0.0;
  double momentum = 0.0;
  double pressure = 0.0;
  double correct = 0.0;
  double pic_advance = 0.0;

  /// Time spent inside the SIMPLE loop.
  double simple() const { return drag_refresh + momentum + pressure + correct; }
  double total() const { return pic_deposit + simple() + pic_advance; }
  PhaseTiming& operator+=(const PhaseTiming& o);
};

struct StepReport {
  bool accepted = false;
  bool converged = false;
  bool at_floor = false;       ///< accepted at dt_min without meeting the criteria
  double dt = 0.0;             ///< step size of the accepted attempt
  int attempts = 0;
  int outer_iterations = 0;    ///< of the accepted attempt
  int total_outer_iterations = 0;  ///< over all attempts
  int drag_evaluations = 0;    ///< of the accepted attempt
  bool cfl_ok = true;
  std::vector<ResidualRecord> residuals;  ///< of the accepted attempt
  PhaseTiming timing;          ///< summed over all attempts
  ReflectReport reflect;
  std::size_t overpacked_cells = 0;
};

/// Executes time steps with equation decomposition.
class StepRunner {
 public:
  StepRunner(const CaseSetup& setup, DeviceAssignment assignment, CouplingMode mode,
             SimpleConfig simple);

  /// Advances `state` by one accepted step, retrying with smaller dt as needed. Rejected
  /// attempts leave `state` untouched.
  StepReport run_time_step(SimState& state, TimeController& tc);

  /// One attempt at a fixed dt, modifying `state` in place (not transactional).
  /// With `allow_unconverged` false, a non-converged attempt skips the parcel advance.
  StepReport attempt_step(SimState& state, double dt, bool allow_unconverged);

  void set_access_log(AccessLog* log) { log_ = log; }
  const StepPlan& plan() const { return plan_; }
  const DeviceAssignment& assignment() const { return assignment_; }
  CouplingMode mode() const { return mode_; }
  const CaseSetup& setup() const { return setup_; }

 private:
  void touch(int worker, const char* buffer, bool write);
  void barrier();

  const CaseSetup& setup_;
  DeviceAssignment assignment_;
  CouplingMode mode_;
  SimpleConfig simple_;
  StepPlan plan_;
  WorkerPool pool_;
  AccessLog* log_ = nullptr;
};

struct OutputOptions {
  std::filesystem::path dir;          ///< empty: no files
  double dump_interval = 0.0;         ///< 0: initial and final dumps only
  std::vector<Vec3> probes;
  double probe_interval = 1e-2;
  double mean_discard = 0.0;          ///< mean fields accumulate from this time on
};

struct SimulationSetup {
  CaseSetup setup;
  SimState initial;
  DeviceAssignment assignment;
  CouplingMode mode = CouplingMode::Explicit;
  SimpleConfig simple;
  TimeController time;
  OutputOptions output;
};

struct SimulationResult {
  SimState final_state;
  TimeController time;
  double t_start = 0.0;
  std::size_t steps = 0;
  std::size_t rejected_attempts = 0;
  std::size_t floor_accepts = 0;
  int total_outer_iterations = 0;
  PhaseTiming timing;
  std::vector<ProbeSeries> probes;
  std::vector<double> dp_times;
  std::vector<double> dp_values;      ///< inlet-to-outlet pressure drop per accepted step
  double mean_weight = 0.0;           ///< time covered by the means [s]
  Field mean_eps_g;
  Field mean_p;
  std::vector<ResidualRecord> last_residuals;
  std::vector<std::filesystem::path> dumps;

  /// Time-weighted mean pressure drop over steps ending after `discard`.
  double mean_pressure_drop(double discard) const;
};

/// Builds the initial state for a case: hydrostatic gas column, optional uniform gas
/// velocity on Active faces, deposited parcels and the boundary pass.
SimState initial_state(const CaseSetup& setup, ParcelSet parcels, const Vec3& gas_velocity = {});

/// Advances until t_end with adaptive dt. Throws SolverError when a step fails
/// irrecoverably at dt_min.
SimulationResult run_simulation(const SimulationSetup& sim, double t_end);

}  // namespace mppic
