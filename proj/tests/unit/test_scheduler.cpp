#include <gtest/gtest.h>

#include <cmath>

#include "helpers.hpp"
#include "mppic/cases.hpp"
#include "mppic/config.hpp"
#include "mppic/error.hpp"
#include "mppic/scheduler.hpp"

using namespace mppic;

namespace {

RunConfig small_bed() {
  RunConfig c = desk_bed_config({6, 6, 18}, 40000.0);
  c.output.dir.clear();
  return c;
}

RunConfig single_phase() {
  RunConfig c = small_bed();
  c.solids.enabled = false;
  return c;
}

SimState one_step(const SimulationSetup& sim, const std::string& devices, CouplingMode mode,
                  StepReport* report = nullptr) {
  StepRunner runner(sim.setup, parse_assignment(devices), mode, sim.simple);
  SimState st = sim.initial;
  TimeController tc = sim.time;
  const StepReport r = runner.run_time_step(st, tc);
  if (report) *report = r;
  return st;
}

}  // namespace

TEST(Scheduler, ParseSerialAssignment) {
  const DeviceAssignment a = parse_assignment("111[1]");
  EXPECT_EQ(a.u_dev, 1);
  EXPECT_EQ(a.v_dev, 1);
  EXPECT_EQ(a.w_dev, 1);
  EXPECT_EQ(a.p_devs, std::vector<int>{1});
  EXPECT_EQ(a.pic_dev, 1);
  EXPECT_EQ(a.text(), "111[1]");
}

TEST(Scheduler, ParseFourWorkerAssignment) {
  const DeviceAssignment a = parse_assignment("234[1234]");
  EXPECT_EQ(a.u_dev, 2);
  EXPECT_EQ(a.v_dev, 3);
  EXPECT_EQ(a.w_dev, 4);
  EXPECT_EQ(a.p_devs, (std::vector<int>{1, 2, 3, 4}));
  EXPECT_EQ(a.pic_dev, 1);
  EXPECT_EQ(a.pressure_dev(), 1);
  EXPECT_EQ(a.max_id(), 4);
}

TEST(Scheduler, AssignmentErrors) {
  EXPECT_THROW(parse_assignment("123[45]", 4), ConfigError);
  EXPECT_NO_THROW(parse_assignment("123[4]", 4));
  for (const char* bad : {"", "11[1]", "1111[1]", "111", "111[]", "111[1", "101[1]", "1a1[1]", "111[9]"})
    EXPECT_THROW(parse_assignment(bad), ConfigError) << bad;
}

TEST(Scheduler, CouplingNames) {
  EXPECT_EQ(parse_coupling("explicit"), CouplingMode::Explicit);
  EXPECT_EQ(parse_coupling("implicit"), CouplingMode::Implicit);
  EXPECT_THROW(parse_coupling("semi"), ConfigError);
}

TEST(Scheduler, StepPlanBarriers) {
  const StepPlan ex = make_step_plan(CouplingMode::Explicit);
  const StepPlan im = make_step_plan(CouplingMode::Implicit);
  EXPECT_EQ(ex.before.front(), Phase::PicDeposit);
  EXPECT_EQ(std::count(ex.outer.begin(), ex.outer.end(), Phase::DragRefresh), 0);
  EXPECT_EQ(im.outer.front(), Phase::DragRefresh);
  for (const StepPlan* p : {&ex, &im}) {
    // Every working phase inside the loop is followed by exactly one barrier.
    for (std::size_t i = 0; i < p->outer.size(); ++i) {
      if (p->outer[i] == Phase::Barrier) continue;
      ASSERT_LT(i + 1, p->outer.size());
      EXPECT_EQ(p->outer[i + 1], Phase::Barrier);
    }
    std::vector<Phase> flat = p->before;
    flat.insert(flat.end(), p->outer.begin(), p->outer.end());
    flat.insert(flat.end(), p->after.begin(), p->after.end());
    EXPECT_NE(flat.front(), Phase::Barrier);
    for (std::size_t i = 1; i < flat.size(); ++i)
      EXPECT_FALSE(flat[i] == Phase::Barrier && flat[i - 1] == Phase::Barrier) << i;
    const auto pos = [&](Phase ph) { return std::find(p->outer.begin(), p->outer.end(), ph) - p->outer.begin(); };
    EXPECT_LT(pos(Phase::Momentum), pos(Phase::Pressure));
    EXPECT_LT(pos(Phase::Pressure), pos(Phase::Correct));
    EXPECT_EQ(p->after.back(), Phase::AdaptDt);
  }
}

TEST(Scheduler, WorkerQueuesRunInOrder) {
  WorkerPool pool(3);
  std::vector<int> seen;
  std::vector<std::future<void>> done;
  for (int i = 0; i < 50; ++i) done.push_back(pool.submit(2, [&seen, i] { seen.push_back(i); }));
  for (auto& f : done) f.get();
  ASSERT_EQ(seen.size(), 50u);
  for (int i = 0; i < 50; ++i) EXPECT_EQ(seen[i], i);
  EXPECT_THROW(pool.submit(4, [] {}), Error);
}

TEST(Scheduler, WorkerExceptionsPropagate) {
  WorkerPool pool(2);
  auto f = pool.submit(1, [] { throw SolverError("boom"); });
  EXPECT_THROW(f.get(), SolverError);
}

TEST(Scheduler, AccessLogFindsConflicts) {
  AccessLog log;
  log.record(1, "u", true);
  log.record(2, "u", false);
  log.barrier();
  log.record(1, "v", true);
  log.record(1, "v", false);
  log.record(2, "w", false);
  log.record(3, "w", false);
  const auto c = log.conflicts();
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0].epoch, 0);
  EXPECT_EQ(c[0].buffer, "u");
}

TEST(SchedulerProperty, NoBufferSharedWithinAPhase) {
  const SimulationSetup sim = make_simulation(small_bed());
  for (CouplingMode mode : {CouplingMode::Explicit, CouplingMode::Implicit}) {
    StepRunner runner(sim.setup, parse_assignment("234[1234]"), mode, sim.simple);
    AccessLog log;
    runner.set_access_log(&log);
    SimState st = sim.initial;
    TimeController tc = sim.time;
    runner.run_time_step(st, tc);
    EXPECT_GT(log.events().size(), 20u);
    EXPECT_TRUE(log.conflicts().empty()) << log.conflicts().front().buffer;
  }
}

TEST(Scheduler, ZeroParcelsIsSinglePhaseStep) {
  const SimulationSetup sim = make_simulation(single_phase());
  ASSERT_EQ(sim.initial.parcels.size(), 0u);
  StepReport r;
  const SimState st = one_step(sim, "111[1]", CouplingMode::Implicit, &r);
  EXPECT_TRUE(r.accepted);
  EXPECT_TRUE(r.converged);
  for (int a = 0; a < 3; ++a)
    for (double f : st.fields.force(a)) EXPECT_EQ(f, 0.0);
  EXPECT_EQ(st.fields.eps_g, sim.initial.fields.eps_g);
}

TEST(Scheduler, ExplicitEqualsImplicitForZeroSlipParcels) {
  RunConfig c = small_bed();
  c.gas.gravity = {0.0, 0.0, 0.0};
  c.bc.inlet_velocity.reset();
  c.initial_velocity = {};
  c.grid.regions.erase(c.grid.regions.begin());
  const SimulationSetup sim = make_simulation(c);
  StepReport ex_r, im_r;
  const SimState ex = one_step(sim, "111[1]", CouplingMode::Explicit, &ex_r);
  const SimState im = one_step(sim, "111[1]", CouplingMode::Implicit, &im_r);
  EXPECT_TRUE(ex == im);
  for (int a = 0; a < 3; ++a)
    for (double f : ex.fields.force(a)) EXPECT_EQ(f, 0.0);
}

TEST(Scheduler, DragEvaluationCounts) {
  const SimulationSetup sim = make_simulation(small_bed());
  StepReport ex, im;
  one_step(sim, "111[1]", CouplingMode::Explicit, &ex);
  one_step(sim, "111[1]", CouplingMode::Implicit, &im);
  EXPECT_EQ(ex.drag_evaluations, 1);
  EXPECT_GT(im.outer_iterations, 1);
  EXPECT_EQ(im.drag_evaluations, im.outer_iterations);
}

TEST(SchedulerProperty, AssignmentsGiveBitwiseIdenticalSteps) {
  const SimulationSetup sim = make_simulation(small_bed());
  for (CouplingMode mode : {CouplingMode::Explicit, CouplingMode::Implicit}) {
    const SimState ref = one_step(sim, "111[1]", mode);
    for (const char* dev : {"234[1234]", "212[1]", "321[3]", "888[8]"}) {
      const SimState other = one_step(sim, dev, mode);
      EXPECT_TRUE(ref == other) << dev << " " << to_string(mode);
    }
  }
}

TEST(Scheduler, RejectedAttemptLeavesStateUntouched) {
  const SimulationSetup sim = make_simulation(small_bed());
  SimpleConfig strict = sim.simple;
  strict.max_outer = 1;
  StepRunner runner(sim.setup, parse_assignment("111[1]"), CouplingMode::Explicit, strict);
  SimState st = sim.initial;
  TimeController tc = sim.time;
  tc.dt_min = tc.dt / 2.0;
  const StepReport r = runner.run_time_step(st, tc);
  EXPECT_EQ(r.attempts, 2);
  EXPECT_TRUE(r.at_floor);
  EXPECT_EQ(r.dt, tc.dt_min);
  // The accepted attempt ran from the original state at the reduced step.
  SimState again = sim.initial;
  runner.attempt_step(again, tc.dt_min, true);
  again.time += tc.dt_min;
  EXPECT_TRUE(st == again);
}

TEST(Scheduler, FixedStepCount) {
  RunConfig c = single_phase();
  c.time.dt = c.time.dt_min = c.time.dt_max = 1e-3;
  SimulationSetup sim = make_simulation(c);
  const SimulationResult r = run_simulation(sim, 0.0105);
  EXPECT_EQ(r.steps, 11u);
  EXPECT_GE(r.final_state.time, 0.0105);
}

TEST(Scheduler, ZeroEndTimeDumpsInitialStateOnly) {
  test::TempDir dir("sched");
  RunConfig c = small_bed();
  c.output.dir = dir.path.string();
  SimulationSetup sim = make_simulation(c);
  const SimulationResult r = run_simulation(sim, 0.0);
  EXPECT_EQ(r.steps, 0u);
  EXPECT_TRUE(std::filesystem::exists(dir / "initial.mpxd"));
  EXPECT_FALSE(std::filesystem::exists(dir / "final.mpxd"));
  EXPECT_TRUE(r.final_state == sim.initial);
}

TEST(Scheduler, DiscardWindowExcludesEarlySteps) {
  RunConfig c = single_phase();
  c.time.dt = c.time.dt_min = c.time.dt_max = 1e-3;
  SimulationSetup sim = make_simulation(c);
  sim.output.mean_discard = 0.004;
  const SimulationResult r = run_simulation(sim, 0.010);
  EXPECT_NEAR(r.mean_weight, 0.006, 1e-12);
  ASSERT_EQ(r.dp_times.size(), 10u);
  double sum = 0.0;
  for (std::size_t i = 4; i < 10; ++i) sum += r.dp_values[i];
  EXPECT_NEAR(r.mean_pressure_drop(0.004), sum / 6.0, 1e-9 * std::abs(sum));
}

TEST(Scheduler, SimulationWritesTimeSeries) {
  test::TempDir dir("sched");
  RunConfig c = small_bed();
  c.output.dir = dir.path.string();
  c.output.probe_interval = 1e-3;
  c.mean_discard = 0.0;
  SimulationSetup sim = make_simulation(c);
  const SimulationResult r = run_simulation(sim, 0.003);
  for (const char* f : {"initial.mpxd", "final.mpxd", "residuals.csv", "probe_0.csv", "mean_fields.csv",
                        "pressure_drop.csv"})
    EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
  ASSERT_EQ(r.probes.size(), 1u);
  EXPECT_GE(r.probes[0].times.size(), 3u);
  for (std::size_t i = 1; i < r.probes[0].times.size(); ++i)
    EXPECT_GT(r.probes[0].times[i], r.probes[0].times[i - 1]);
}
