#include "mppic/fields.hpp"

#include <algorithm>
#include <cmath>

#include "mppic/error.hpp"

namespace mppic {

EquationSystem::EquationSystem(const GridSpec& grid)
    : stride{grid.stride(0), grid.stride(1), grid.stride(2)},
      a_p(grid.stored_count(), 1.0),
      rhs(grid.stored_count(), 0.0),
      x(grid.stored_count(), 0.0),
      source_scale(grid.stored_count(), 0.0) {
  for (auto& a : a_nb) a.assign(grid.stored_count(), 0.0);
}

void EquationSystem::multiply(std::span<const double> v, std::span<double> y) const {
  for (const std::size_t r : active) {
    double acc = a_p[r] * v[r];
    for (int s = 0; s < 6; ++s) {
      const double c = a_nb[s][r];
      if (c != 0.0) acc -= c * v[neighbour_index(r, s)];
    }
    y[r] = acc;
  }
}

double EquationSystem::row_residual(std::size_t r, std::span<const double> v) const {
  double acc = rhs[r] - a_p[r] * v[r];
  for (int s = 0; s < 6; ++s) {
    const double c = a_nb[s][r];
    if (c != 0.0) acc += c * v[neighbour_index(r, s)];
  }
  return acc;
}

FieldState::FieldState(const GridSpec& grid) {
  const std::size_t n = grid.stored_count();
  eps_g.assign(n, 1.0);
  p.assign(n, 0.0);
  u.assign(n, 0.0);
  v.assign(n, 0.0);
  w.assign(n, 0.0);
  eps_p.assign(n, 0.0);
  f_x.assign(n, 0.0);
  f_y.assign(n, 0.0);
  f_z.assign(n, 0.0);
}

FaceKind classify_face(const Mesh& mesh, int axis, std::size_t idx) {
  const GridSpec& g = mesh.grid;
  const Index3 c = g.coords(idx);
  if (c[axis] > g.n[axis]) return FaceKind::Outside;
  const CellFlag a = mesh.flags[idx];
  const CellFlag b = mesh.flags[idx + g.stride(axis)];
  const bool fa = a == CellFlag::Fluid;
  const bool fb = b == CellFlag::Fluid;
  if (fa && fb) return FaceKind::Active;
  if (!fa && !fb) return FaceKind::Outside;
  const CellFlag other = fa ? b : a;
  if (other == CellFlag::Outlet) return FaceKind::Active;
  return FaceKind::Fixed;
}

double fixed_face_velocity(const Mesh& mesh, const BoundarySpec& bc, int axis, std::size_t idx) {
  const CellFlag a = mesh.flags[idx];
  const CellFlag b = mesh.flags[idx + mesh.grid.stride(axis)];
  const double speed = bc.inlet_velocity.value_or(0.0);
  if (a == CellFlag::Inlet && b == CellFlag::Fluid) return speed;
  if (b == CellFlag::Inlet && a == CellFlag::Fluid) return -speed;
  return 0.0;
}

bool outside_face_zero_gradient(const Mesh& mesh, int axis, std::size_t idx) {
  const GridSpec& g = mesh.grid;
  if (mesh.flags[idx] == CellFlag::Outlet) return true;
  const Index3 c = g.coords(idx);
  if (c[axis] <= g.n[axis] && mesh.flags[idx + g.stride(axis)] == CellFlag::Outlet) return true;
  return false;
}

void apply_boundary_conditions(FieldState& state, const Mesh& mesh, const BoundarySpec& bc) {
  const GridSpec& g = mesh.grid;
  const bool has_inlet = mesh.flags.has(CellFlag::Inlet);
  if (bc.inlet_velocity && !has_inlet)
    throw GeometryError("inlet velocity given but the mesh has no inlet cells");
  if (has_inlet && !bc.inlet_velocity)
    throw GeometryError("mesh has inlet cells but no inlet velocity was given");

  const std::size_t count = g.stored_count();

  // Prescribed normal velocities.
  for (int a = 0; a < 3; ++a) {
    Field& vel = state.velocity(a);
    for (std::size_t idx = 0; idx < count; ++idx) {
      if (classify_face(mesh, a, idx) == FaceKind::Fixed)
        vel[idx] = fixed_face_velocity(mesh, bc, a, idx);
    }
  }

  // Ghost velocities: mirror across the boundary; no-slip negates, outlets copy.
  for (int a = 0; a < 3; ++a) {
    Field& vel = state.velocity(a);
    for (std::size_t idx = 0; idx < count; ++idx) {
      if (classify_face(mesh, a, idx) != FaceKind::Outside) continue;
      Index3 c = g.coords(idx);
      int ghost_axes = 0;
      int mirror_axis = -1;
      Index3 src = c;
      for (int b = 0; b < 3; ++b) {
        const bool normal = b == a;
        if (!normal && (c[b] == 0 || c[b] == g.n[b] + 1)) {
          ++ghost_axes;
          mirror_axis = b;
          src[b] = c[b] == 0 ? 1 : g.n[b];
        } else if (normal && c[b] == g.n[b] + 1) {
          ++ghost_axes;
          mirror_axis = b;
          src[b] = g.n[b];
        }
      }
      if (ghost_axes != 1) {
        vel[idx] = 0.0;
        continue;
      }
      const double interior = vel[g.index(src)];
      if (mirror_axis == a) {
        vel[idx] = interior;
      } else {
        vel[idx] = outside_face_zero_gradient(mesh, a, idx) ? interior : -interior;
      }
    }
  }

  // Ghost scalars.
  for (std::size_t idx = 0; idx < count; ++idx) {
    const Index3 c = g.coords(idx);
    if (g.is_interior(c)) continue;
    Index3 src = c;
    int ghost_axes = 0;
    for (int b = 0; b < 3; ++b) {
      if (c[b] == 0 || c[b] == g.n[b] + 1) {
        ++ghost_axes;
        src[b] = std::clamp(c[b], 1, g.n[b]);
      }
    }
    const std::size_t s = g.index(src);
    const CellFlag flag = mesh.flags[idx];
    if (ghost_axes == 1 && flag == CellFlag::Outlet) {
      state.p[idx] = 2.0 * bc.outlet_pressure - state.p[s];
    } else {
      state.p[idx] = state.p[s];
    }
    if (flag == CellFlag::Inlet) {
      state.eps_g[idx] = 1.0;
      state.eps_p[idx] = 0.0;
    } else {
      state.eps_g[idx] = state.eps_g[s];
      state.eps_p[idx] = state.eps_p[s];
    }
  }
}

Field continuity_imbalance(const FieldState& state, const Mesh& mesh, const GasProps& gas,
                           std::span<const double> eps_g_old, double dt) {
  const GridSpec& g = mesh.grid;
  Field b(g.stored_count(), 0.0);
  const double vol = g.cell_volume();
  const bool transient = !eps_g_old.empty() && dt > 0.0;
  for (int k = 1; k <= g.n[2]; ++k)
    for (int j = 1; j <= g.n[1]; ++j)
      for (int i = 1; i <= g.n[0]; ++i) {
        const std::size_t idx = g.index(i, j, k);
        if (mesh.flags[idx] != CellFlag::Fluid) continue;
        double net_in = 0.0;
        for (int a = 0; a < 3; ++a) {
          const Field& vel = state.velocity(a);
          const std::size_t s = g.stride(a);
          const double area = g.face_area(a);
          const double ue = vel[idx];
          const double uw = vel[idx - s];
          const double fe = gas.rho_g * upwind_eps(state.eps_g[idx], state.eps_g[idx + s], ue) * ue * area;
          const double fw = gas.rho_g * upwind_eps(state.eps_g[idx - s], state.eps_g[idx], uw) * uw * area;
          net_in += fw - fe;
        }
        if (transient) net_in -= gas.rho_g * vol * (state.eps_g[idx] - eps_g_old[idx]) / dt;
        b[idx] = net_in;
      }
  return b;
}

double continuity_residual(std::span<const double> imbalance, const Mesh& mesh, double norm_g) {
  double sum = 0.0;
  for (std::size_t idx = 0; idx < imbalance.size(); ++idx) {
    if (mesh.flags[idx] == CellFlag::Fluid) sum += std::abs(imbalance[idx]);
  }
  return sum / norm_g;
}

double momentum_residual(const EquationSystem& sys, std::span<const double> values) {
  const std::span<const double> x = values.empty() ? std::span<const double>(sys.x) : values;
  double num = 0.0;
  double den = 0.0;
  double src = 0.0;
  for (const std::size_t r : sys.active) {
    num += std::abs(sys.row_residual(r, x));
    den += std::abs(sys.a_p[r] * x[r]);
    src += sys.source_scale[r];
  }
  return num / std::max({den, src, 1e-30});
}

BoundaryFlux boundary_mass_flux(const FieldState& state, const Mesh& mesh, const GasProps& gas) {
  const GridSpec& g = mesh.grid;
  BoundaryFlux flux;
  for (int a = 0; a < 3; ++a) {
    const Field& vel = state.velocity(a);
    const double area = g.face_area(a);
    const std::size_t s = g.stride(a);
    for (std::size_t idx = 0; idx < g.stored_count(); ++idx) {
      const Index3 c = g.coords(idx);
      if (c[a] > g.n[a]) continue;
      const CellFlag lo = mesh.flags[idx];
      const CellFlag hi = mesh.flags[idx + s];
      const double m = gas.rho_g * upwind_eps(state.eps_g[idx], state.eps_g[idx + s], vel[idx]) *
                       vel[idx] * area;
      if (lo == CellFlag::Inlet && hi == CellFlag::Fluid) flux.inflow += m;
      if (hi == CellFlag::Inlet && lo == CellFlag::Fluid) flux.inflow -= m;
      if (hi == CellFlag::Outlet && lo == CellFlag::Fluid) flux.outflow += m;
      if (lo == CellFlag::Outlet && hi == CellFlag::Fluid) flux.outflow -= m;
    }
  }
  return flux;
}

double inlet_outlet_pressure_drop(const FieldState& state, const Mesh& mesh,
                                  const BoundarySpec& bc) {
  const GridSpec& g = mesh.grid;
  double sum = 0.0;
  int count = 0;
  for (std::size_t idx = 0; idx < g.stored_count(); ++idx) {
    if (mesh.flags[idx] != CellFlag::Inlet) continue;
    const Index3 c = g.coords(idx);
    for (int a = 0; a < 3; ++a) {
      if (c[a] != 0 && c[a] != g.n[a] + 1) continue;
      const int dir = c[a] == 0 ? 1 : -1;
      Index3 c1 = c;
      c1[a] += dir;
      Index3 c2 = c1;
      c2[a] += dir;
      const std::size_t i1 = g.index(c1);
      const std::size_t i2 = g.index(c2);
      if (mesh.flags[i1] != CellFlag::Fluid) continue;
      const double p1 = state.p[i1];
      const double face = mesh.flags[i2] == CellFlag::Fluid ? 1.5 * p1 - 0.5 * state.p[i2] : p1;
      sum += face;
      ++count;
    }
  }
  if (count == 0) throw GeometryError("pressure drop requested on a mesh without inlet cells");
  return sum / count - bc.outlet_pressure;
}

}  // namespace mppic
