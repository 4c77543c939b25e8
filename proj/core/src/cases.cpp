#include "mppic/cases.hpp"

namespace mppic {

RunConfig verification_bed_config() {
  RunConfig c;
  c.grid.extent = {0.12, 0.72, 0.12};
  c.grid.cells = {27, 162, 27};
  c.grid.regions = {
      {CellFlag::Inlet, {0.0, 0.0, 0.0}, {0.12, 0.0, 0.12}},
      {CellFlag::Outlet, {0.0, 0.72, 0.0}, {0.12, 0.72, 0.12}},
  };
  c.gas.rho_g = 1.093;
  c.gas.mu_g = 1.9e-5;
  c.gas.gravity = {0.0, -9.81, 0.0};
  c.bc.inlet_velocity = 0.5;
  c.solids.enabled = true;
  c.solids.d_p = 400e-6;
  c.solids.rho_p = 2000.0;
  c.solids.omega = 10.0;
  c.solids.eps_p0 = 0.58;
  c.solids.bed = {{0.0, 0.0, 0.0}, {0.12, 0.12, 0.12}};
  c.time.dt = 1e-3;
  c.time.dt_max = 1e-3;
  c.output.probes = {{0.06, 0.06, 0.06}};
  return c;
}

RunConfig desk_bed_config(Index3 cells, double omega) {
  RunConfig c;
  c.grid.extent = {0.12, 0.12, 0.36};
  c.grid.cells = cells;
  c.grid.regions = {
      {CellFlag::Inlet, {0.0, 0.0, 0.0}, {0.12, 0.12, 0.0}},
      {CellFlag::Outlet, {0.0, 0.0, 0.36}, {0.12, 0.12, 0.36}},
  };
  c.gas.rho_g = 1.0;
  c.gas.mu_g = 1.8e-5;
  c.gas.gravity = {0.0, 0.0, -9.81};
  c.bc.inlet_velocity = 0.15;
  c.initial_velocity = {0.0, 0.0, 0.15};
  c.solids.enabled = true;
  c.solids.d_p = 200e-6;
  c.solids.rho_p = 2000.0;
  c.solids.omega = omega;
  c.solids.eps_p0 = 0.58;
  c.solids.bed = {{0.0, 0.0, 0.0}, {0.12, 0.12, 0.12}};
  // Seeding fluctuations put a few cells above 0.6 at eps_p0 = 0.58.
  c.solids.stress.eps_cp = 0.65;
  c.time.dt = 1e-3;
  c.time.dt_min = 1e-6;
  c.time.dt_max = 1e-3;
  c.output.probes = {{0.06, 0.06, 0.06}};
  c.output.probe_interval = 1e-2;
  c.mean_discard = 1.0;
  return c;
}

RunConfig bfs_config(Index3 cells) {
  RunConfig c;
  c.grid.extent = {0.098, 0.049, 0.98};
  c.grid.cells = cells;
  c.grid.regions = {
      {CellFlag::Blocked, {0.0, 0.0, 0.0}, {0.049, 0.049, 0.098}},
      {CellFlag::Inlet, {0.049, 0.0, 0.0}, {0.098, 0.049, 0.0}},
      {CellFlag::Outlet, {0.0, 0.0, 0.98}, {0.098, 0.049, 0.98}},
  };
  c.gas.rho_g = 1.0;
  c.gas.mu_g = 1.8e-5;
  c.gas.gravity = {0.0, 0.0, 0.0};
  c.bc.inlet_velocity = 1.0;
  c.initial_velocity = {0.0, 0.0, 0.5};
  c.time.dt = 1e-3;
  c.time.dt_max = 1e-3;
  return c;
}

}  // namespace mppic
