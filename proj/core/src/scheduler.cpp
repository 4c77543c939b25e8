#include "mppic/scheduler.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <map>
#include <set>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "mppic/error.hpp"
#include "mppic/verify.hpp"

namespace mppic {

int DeviceAssignment::max_id() const {
  int m = std::max({u_dev, v_dev, w_dev, pic_dev});
  for (const int p : p_devs) m = std::max(m, p);
  return m;
}

std::string DeviceAssignment::text() const {
  std::string s = fmt::format("{}{}{}[", u_dev, v_dev, w_dev);
  for (const int p : p_devs) s += static_cast<char>('0' + p);
  return s + "]";
}

DeviceAssignment parse_assignment(std::string_view text, int available_workers) {
  auto fail = [&](const std::string& why) -> ConfigError {
    return ConfigError("device assignment \"" + std::string(text) + "\": " + why);
  };
  if (text.size() < 6 || text[3] != '[' || text.back() != ']')
    throw fail("expected the form UVW[P...], e.g. 111[1]");
  auto digit = [&](char c) {
    if (c < '1' || c > '8') throw fail("worker ids are digits 1-8");
    const int id = c - '0';
    if (id > available_workers)
      throw fail("worker " + std::to_string(id) + " exceeds the " + std::to_string(available_workers) +
                 " available workers");
    return id;
  };
  DeviceAssignment d;
  d.u_dev = digit(text[0]);
  d.v_dev = digit(text[1]);
  d.w_dev = digit(text[2]);
  d.p_devs.clear();
  for (std::size_t i = 4; i + 1 < text.size(); ++i) d.p_devs.push_back(digit(text[i]));
  if (d.p_devs.empty()) throw fail("empty pressure worker list");
  d.pic_dev = 1;
  if (d.p_devs.size() > 1) {
    spdlog::warn("assignment {}: the pressure solve runs on worker {} only", std::string(text),
                 d.p_devs.front());
  }
  return d;
}

const char* to_string(CouplingMode mode) {
  return mode == CouplingMode::Explicit ? "explicit" : "implicit";
}

CouplingMode parse_coupling(std::string_view text) {
  if (text == "explicit") return CouplingMode::Explicit;
  if (text == "implicit") return CouplingMode::Implicit;
  throw ConfigError("coupling must be explicit or implicit, got \"" + std::string(text) + "\"");
}

const char* to_string(Phase phase) {
  switch (phase) {
    case Phase::PicDeposit: return "pic-deposit";
    case Phase::DragRefresh: return "drag-refresh";
    case Phase::Barrier: return "barrier";
    case Phase::Momentum: return "momentum";
    case Phase::Pressure: return "pressure";
    case Phase::Correct: return "correct";
    case Phase::PicAdvance: return "pic-advance";
    case Phase::AdaptDt: return "adapt-dt";
  }
  return "?";
}

StepPlan make_step_plan(CouplingMode mode) {
  StepPlan plan;
  plan.before = {Phase::PicDeposit};
  if (mode == CouplingMode::Implicit) plan.outer.push_back(Phase::DragRefresh);
  plan.outer.insert(plan.outer.end(), {Phase::Barrier, Phase::Momentum, Phase::Barrier, Phase::Pressure,
                                       Phase::Barrier, Phase::Correct, Phase::Barrier});
  plan.after = {Phase::PicAdvance, Phase::Barrier, Phase::AdaptDt};
  return plan;
}

WorkerPool::WorkerPool(int workers) {
  if (workers < 1 || workers > kMaxWorkers) throw ConfigError("worker count must lie in 1..8");
  for (int i = 0; i < workers; ++i) {
    auto w = std::make_unique<Worker>();
    Worker* self = w.get();
    w->thread = std::thread([self] {
      for (;;) {
        std::packaged_task<void()> task;
        {
          std::unique_lock lock(self->mutex);
          self->cv.wait(lock, [self] { return self->stop || !self->queue.empty(); });
          if (self->queue.empty()) return;
          task = std::move(self->queue.front());
          self->queue.pop_front();
        }
        task();
      }
    });
    workers_.push_back(std::move(w));
  }
}

WorkerPool::~WorkerPool() {
  for (auto& w : workers_) {
    {
      std::lock_guard lock(w->mutex);
      w->stop = true;
    }
    w->cv.notify_one();
  }
  for (auto& w : workers_) w->thread.join();
}

std::future<void> WorkerPool::submit(int worker, std::function<void()> task) {
  if (worker < 1 || worker > size()) throw ConfigError("no worker " + std::to_string(worker));
  Worker& w = *workers_[static_cast<std::size_t>(worker - 1)];
  std::packaged_task<void()> pt(std::move(task));
  auto fut = pt.get_future();
  {
    std::lock_guard lock(w.mutex);
    w.queue.push_back(std::move(pt));
  }
  w.cv.notify_one();
  return fut;
}

void AccessLog::barrier() {
  std::lock_guard lock(mutex_);
  ++epoch_;
}

void AccessLog::record(int worker, std::string buffer, bool write) {
  std::lock_guard lock(mutex_);
  events_.push_back({epoch_, worker, std::move(buffer), write});
}

std::vector<AccessLog::Event> AccessLog::events() const {
  std::lock_guard lock(mutex_);
  return events_;
}

std::vector<AccessLog::Conflict> AccessLog::conflicts() const {
  std::lock_guard lock(mutex_);
  std::vector<Conflict> out;
  for (const Event& w : events_) {
    if (!w.write) continue;
    for (const Event& o : events_) {
      if (o.epoch == w.epoch && o.buffer == w.buffer && o.worker != w.worker)
        out.push_back({w.epoch, w.buffer, w.worker, o.worker});
    }
  }
  return out;
}

PhaseTiming& PhaseTiming::operator+=(const PhaseTiming& o) {
  pic_deposit += o.pic_deposit;
  drag_refresh += o.drag_refresh;
  momentum += o.momentum;
  pressure += o.pressure;
  correct += o.correct;
  pic_advance += o.pic_advance;
  return *this;
}

StepRunner::StepRunner(const CaseSetup& setup, DeviceAssignment assignment, CouplingMode mode,
                       SimpleConfig simple)
    : setup_(setup),
      assignment_(std::move(assignment)),
      mode_(mode),
      simple_(simple),
      plan_(make_step_plan(mode)),
      pool_(assignment_.max_id()) {
  simple_.validate();
}

void StepRunner::touch(int worker, const char* buffer, bool write) {
  if (log_) log_->record(worker, buffer, write);
}

void StepRunner::barrier() {
  if (log_) log_->barrier();
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void publish_force(FieldState& fields, const FaceCoupling& c) {
  fields.f_x = c.force[0];
  fields.f_y = c.force[1];
  fields.f_z = c.force[2];
}

}  // namespace

StepReport StepRunner::attempt_step(SimState& st, double dt, bool allow_unconverged) {
  const Mesh& mesh = setup_.mesh;
  const GasProps& gas = setup_.gas;
  const int pic = assignment_.pic_dev;
  const int pdev = assignment_.pressure_dev();
  const bool has_parcels = !st.parcels.empty();

  StepReport rep;
  rep.dt = dt;
  const FieldState old = st.fields;
  FaceCoupling coupling;
  bool have_coupling = false;
  std::array<EquationSystem, 3> mom;
  EquationSystem pp;
  FieldState trial;
  ResidualRecord rec;
  bool converged = false;

  auto refresh_drag = [&]() {
    touch(pic, "parcels", false);
    touch(pic, "fields", false);
    touch(pic, "coupling", true);
    if (!has_parcels) return;
    const ParcelDrag drag = compute_parcel_drag(st.parcels, st.fields, mesh.grid, gas);
    coupling = accumulate_F(st.parcels, drag, st.fields, mesh.grid);
    publish_force(st.fields, coupling);
    have_coupling = true;
    ++rep.drag_evaluations;
  };

  auto run_phase = [&](Phase phase) {
    const auto t0 = Clock::now();
    switch (phase) {
      case Phase::PicDeposit: {
        pool_.submit(pic, [&] {
          touch(pic, "parcels", false);
          touch(pic, "fields", true);
          if (has_parcels) {
            const Deposition dep = deposit(st.parcels, mesh);
            rep.overpacked_cells = dep.overpacked_cells;
            set_volume_fractions(st.fields, dep.eps_p, mesh);
            apply_boundary_conditions(st.fields, mesh, setup_.bc);
          }
          if (mode_ == CouplingMode::Explicit) refresh_drag();
        }).get();
        rep.timing.pic_deposit += seconds_since(t0);
        break;
      }
      case Phase::DragRefresh:
        pool_.submit(pic, refresh_drag).get();
        rep.timing.drag_refresh += seconds_since(t0);
        break;
      case Phase::Barrier:
        barrier();
        break;
      case Phase::Momentum: {
        std::array<std::future<void>, 3> done;
        for (int a = 0; a < 3; ++a) {
          const int dev = assignment_.momentum_dev(a);
          done[static_cast<std::size_t>(a)] = pool_.submit(dev, [&, a, dev] {
            static constexpr const char* names[3] = {"momentum_u", "momentum_v", "momentum_w"};
            touch(dev, "fields", false);
            touch(dev, "coupling", false);
            touch(dev, names[a], true);
            const MomentumInputs in{st.fields, old, have_coupling ? &coupling : nullptr};
            EquationSystem sys = assemble_momentum(a, in, dt, gas, mesh, simple_.urf_mom);
            rec.momentum(a) = momentum_residual(sys, st.fields.velocity(a));
            solve_bicgstab(sys, simple_.lin_tol_mom, simple_.lin_maxit_mom);
            mom[static_cast<std::size_t>(a)] = std::move(sys);
          });
        }
        // Wait for all three before surfacing the first failure.
        std::exception_ptr err;
        for (auto& f : done) {
          try {
            f.get();
          } catch (...) {
            if (!err) err = std::current_exception();
          }
        }
        if (err) std::rethrow_exception(err);
        rep.timing.momentum += seconds_since(t0);
        break;
      }
      case Phase::Pressure:
        pool_.submit(pdev, [&] {
          touch(pdev, "fields", false);
          touch(pdev, "momentum_u", false);
          touch(pdev, "momentum_v", false);
          touch(pdev, "momentum_w", false);
          touch(pdev, "pressure", true);
          trial = st.fields;
          for (int a = 0; a < 3; ++a) trial.velocity(a) = mom[static_cast<std::size_t>(a)].x;
          Field imbalance;
          pp = assemble_pressure_correction(trial, {&mom[0], &mom[1], &mom[2]}, old.eps_g, dt, gas, mesh,
                                            &imbalance);
          rec.continuity = continuity_residual(imbalance, mesh, simple_.norm_g);
          solve_bicgstab(pp, simple_.lin_tol_p, simple_.lin_maxit_p);
        }).get();
        rep.timing.pressure += seconds_since(t0);
        break;
      case Phase::Correct: {
        touch(0, "pressure", false);
        touch(0, "fields", true);
        for (int a = 0; a < 3; ++a) st.fields.velocity(a) = std::move(trial.velocity(a));
        correct_fields(st.fields, pp.x, {&mom[0], &mom[1], &mom[2]}, simple_.urf_p, mesh, setup_.bc);
        rep.residuals.push_back(rec);
        converged = simple_.converged(rec);
        rep.timing.correct += seconds_since(t0);
        break;
      }
      case Phase::PicAdvance: {
        pool_.submit(pic, [&] {
          touch(pic, "fields", false);
          touch(pic, "parcels", true);
          if (!has_parcels) return;
          const ParcelDrag drag = compute_parcel_drag(st.parcels, st.fields, mesh.grid, gas);
          const auto grad_p = face_gradient(st.fields.p, mesh.grid);
          const Field tau = solids_stress(st.fields.eps_p, mesh.grid, setup_.stress);
          const auto grad_tau = stress_gradient(tau, mesh.grid);
          std::vector<ParcelForcing> forcing(st.parcels.size());
          gather_parcel_gradients(st.parcels, mesh.grid, grad_p, grad_tau, forcing);
          for (std::size_t i = 0; i < forcing.size(); ++i) {
            forcing[i].drag_rate = drag.rate[i];
            forcing[i].gas_velocity = drag.gas_velocity[i];
            forcing[i].eps_p = drag.eps_p[i];
          }
          const AdvanceReport adv = advance_parcels(st.parcels, dt, forcing, gas, mesh, setup_.wall);
          rep.cfl_ok = adv.displacement_ok;
          rep.reflect = adv.reflect;
        }).get();
        rep.timing.pic_advance += seconds_since(t0);
        break;
      }
      case Phase::AdaptDt:
        break;
    }
  };

  for (const Phase ph : plan_.before) run_phase(ph);
  for (int k = 1; k <= simple_.max_outer; ++k) {
    rec = ResidualRecord{};
    rec.iteration = k;
    for (const Phase ph : plan_.outer) run_phase(ph);
    rep.outer_iterations = k;
    if (converged) break;
  }
  rep.converged = converged;
  rep.total_outer_iterations = rep.outer_iterations;
  if (!converged && !allow_unconverged) return rep;
  for (const Phase ph : plan_.after) run_phase(ph);
  return rep;
}

StepReport StepRunner::run_time_step(SimState& state, TimeController& tc) {
  StepReport total;
  for (;;) {
    SimState backup = state;
    const bool floor = tc.at_floor();
    const double dt = tc.dt;
    ++total.attempts;
    StepReport rep;
    try {
      rep = attempt_step(state, dt, floor);
    } catch (const SolverError& e) {
      if (floor) throw StepFailure(std::string("step failed at dt_min: ") + e.what());
      spdlog::warn("step attempt at dt={:.3e} failed ({}); retrying", dt, e.what());
      state = std::move(backup);
      tc.dt = std::max(tc.dt * tc.shrink_factor, tc.dt_min);
      continue;
    }
    total.timing += rep.timing;
    total.total_outer_iterations += rep.outer_iterations;
    const StepVerdict verdict = adapt_dt(tc, rep.outer_iterations, rep.converged, rep.cfl_ok);
    if (verdict == StepVerdict::Retry) {
      state = std::move(backup);
      continue;
    }
    if (verdict == StepVerdict::AcceptAtFloor) {
      spdlog::warn("accepting step at dt_min={:.3e} (converged={}, parcel displacement ok={})", dt,
                   rep.converged, rep.cfl_ok);
    }
    state.time += dt;
    total.accepted = true;
    total.at_floor = verdict == StepVerdict::AcceptAtFloor;
    total.converged = rep.converged;
    total.dt = dt;
    total.outer_iterations = rep.outer_iterations;
    total.drag_evaluations = rep.drag_evaluations;
    total.cfl_ok = rep.cfl_ok;
    total.residuals = std::move(rep.residuals);
    total.reflect = rep.reflect;
    total.overpacked_cells = rep.overpacked_cells;
    return total;
  }
}

double SimulationResult::mean_pressure_drop(double discard) const {
  double sum = 0.0;
  double weight = 0.0;
  double prev = t_start;
  for (std::size_t i = 0; i < dp_times.size(); ++i) {
    const double t = dp_times[i];
    if (t > discard) {
      const double w = t - std::max(prev, discard);
      sum += w * dp_values[i];
      weight += w;
    }
    prev = t;
  }
  if (weight == 0.0) throw Error("no pressure-drop samples after the discard window");
  return sum / weight;
}

SimState initial_state(const CaseSetup& setup, ParcelSet parcels, const Vec3& gas_velocity) {
  const Mesh& mesh = setup.mesh;
  SimState st;
  st.fields = FieldState(mesh.grid);
  st.parcels = std::move(parcels);
  if (!st.parcels.empty()) {
    const Deposition dep = deposit(st.parcels, mesh);
    set_volume_fractions(st.fields, dep.eps_p, mesh);
  }
  for (int a = 0; a < 3; ++a) {
    if (gas_velocity[a] == 0.0) continue;
    Field& vel = st.fields.velocity(a);
    for (std::size_t idx = 0; idx < vel.size(); ++idx)
      if (classify_face(mesh, a, idx) == FaceKind::Active) vel[idx] = gas_velocity[a];
  }
  apply_boundary_conditions(st.fields, mesh, setup.bc);
  hydrostatic_pressure(st.fields, mesh, setup.gas, setup.bc);
  return st;
}

namespace {

void write_mean_fields(const SimulationResult& res, const CaseSetup& setup, const std::filesystem::path& path) {
  const GridSpec& g = setup.mesh.grid;
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "i,j,k,x,y,z,eps_g,p_abs\n";
  for (int k = 1; k <= g.n[2]; ++k)
    for (int j = 1; j <= g.n[1]; ++j)
      for (int i = 1; i <= g.n[0]; ++i) {
        const std::size_t idx = g.index(i, j, k);
        const Vec3 x = g.cell_center({i, j, k});
        out << fmt::format("{},{},{},{:.9g},{:.9g},{:.9g},{:.17g},{:.17g}\n", i, j, k, x[0], x[1], x[2],
                           res.mean_eps_g[idx], absolute_pressure(res.mean_p[idx], setup.gas));
      }
}

}  // namespace

SimulationResult run_simulation(const SimulationSetup& sim, double t_end) {
  const CaseSetup& setup = sim.setup;
  const GridSpec& g = setup.mesh.grid;
  const OutputOptions& out = sim.output;
  sim.time.validate();

  SimulationResult res;
  res.final_state = sim.initial;
  res.time = sim.time;
  res.t_start = sim.initial.time;
  SimState& st = res.final_state;
  TimeController& tc = res.time;
  StepRunner runner(setup, sim.assignment, sim.mode, sim.simple);
  ProbeRecorder probes(g, out.probes, out.probe_interval, st.time);
  res.mean_eps_g.assign(g.stored_count(), 0.0);
  res.mean_p.assign(g.stored_count(), 0.0);
  const bool has_dp = setup.mesh.flags.has(CellFlag::Inlet) && setup.mesh.flags.has(CellFlag::Outlet);

  const bool files = !out.dir.empty();
  std::ofstream residual_log;
  auto dump_now = [&](const std::string& name) {
    const auto path = out.dir / name;
    dump_state(st, g, tc.dt, path);
    res.dumps.push_back(path);
  };
  if (files) {
    std::filesystem::create_directories(out.dir);
    residual_log.open(out.dir / "residuals.csv");
    residual_log << "step,time,dt,iteration,continuity,u,v,w\n";
    dump_now("initial.mpxd");
  }
  double next_dump = st.time + out.dump_interval;

  while (t_end - st.time > 1e-9 * tc.dt) {
    const double t_prev = st.time;
    const Field eps_prev = st.fields.eps_g;
    const StepReport rep = runner.run_time_step(st, tc);
    ++res.steps;
    res.rejected_attempts += static_cast<std::size_t>(rep.attempts - 1);
    if (rep.at_floor) ++res.floor_accepts;
    res.total_outer_iterations += rep.total_outer_iterations;
    res.timing += rep.timing;
    res.last_residuals = rep.residuals;
    probes.observe(eps_prev, st.time);

    if (st.time > out.mean_discard) {
      const double w = st.time - std::max(t_prev, out.mean_discard);
      for (std::size_t i = 0; i < g.stored_count(); ++i) {
        res.mean_eps_g[i] += w * st.fields.eps_g[i];
        res.mean_p[i] += w * st.fields.p[i];
      }
      res.mean_weight += w;
    }
    if (has_dp) {
      res.dp_times.push_back(st.time);
      res.dp_values.push_back(inlet_outlet_pressure_drop(st.fields, setup.mesh, setup.bc));
    }
    if (files) {
      for (const ResidualRecord& r : rep.residuals)
        residual_log << fmt::format("{},{:.17g},{:.17g},{},{:.9e},{:.9e},{:.9e},{:.9e}\n", res.steps, st.time,
                                    rep.dt, r.iteration, r.continuity, r.u, r.v, r.w);
      if (out.dump_interval > 0.0 && st.time >= next_dump) {
        dump_now(fmt::format("step_{:07d}.mpxd", res.steps));
        while (next_dump <= st.time) next_dump += out.dump_interval;
      }
    }
  }
  probes.finish(st.fields.eps_g, st.time);
  res.probes = probes.series();

  if (res.mean_weight > 0.0) {
    for (std::size_t i = 0; i < g.stored_count(); ++i) {
      res.mean_eps_g[i] /= res.mean_weight;
      res.mean_p[i] /= res.mean_weight;
    }
  }

  if (files) {
    if (res.steps > 0) dump_now("final.mpxd");
    for (std::size_t i = 0; i < res.probes.size(); ++i)
      write_probe_csv(res.probes[i], out.dir / fmt::format("probe_{}.csv", i));
    if (res.mean_weight > 0.0) write_mean_fields(res, setup, out.dir / "mean_fields.csv");
    if (has_dp) {
      std::ofstream dp(out.dir / "pressure_drop.csv");
      dp << "time,dp\n";
      for (std::size_t i = 0; i < res.dp_times.size(); ++i)
        dp << fmt::format("{:.17g},{:.17g}\n", res.dp_times[i], res.dp_values[i]);
    }
  }
  return res;
}

}  // namespace mppic
