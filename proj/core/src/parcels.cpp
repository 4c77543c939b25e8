#include "mppic/parcels.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "mppic/error.hpp"

namespace mppic {

void ParcelSet::push_back(const Vec3& pos, const Vec3& vel, double diameter, double density,
                          double weight) {
  x.push_back(pos[0]);
  y.push_back(pos[1]);
  z.push_back(pos[2]);
  u.push_back(vel[0]);
  v.push_back(vel[1]);
  w.push_back(vel[2]);
  d.push_back(diameter);
  rho.push_back(density);
  omega.push_back(weight);
}

void ParcelSet::reserve(std::size_t n) {
  for (auto* a : {&x, &y, &z, &u, &v, &w, &d, &rho, &omega}) a->reserve(n);
}

void ParcelSet::erase_flagged(const std::vector<char>& remove) {
  std::size_t out = 0;
  for (std::size_t i = 0; i < size(); ++i) {
    if (remove[i]) continue;
    if (out != i) {
      for (auto* a : {&x, &y, &z, &u, &v, &w, &d, &rho, &omega}) (*a)[out] = (*a)[i];
    }
    ++out;
  }
  for (auto* a : {&x, &y, &z, &u, &v, &w, &d, &rho, &omega}) a->resize(out);
}

std::size_t bed_parcel_count(const Box& region, double eps_p, double d_p, double omega) {
  const double particle = kPi / 6.0 * d_p * d_p * d_p;
  return static_cast<std::size_t>(std::floor(eps_p * region.volume() / (omega * particle)));
}

ParcelSet populate_bed(const Box& region, double eps_p, double d_p, double rho_p, double omega,
                       std::uint64_t seed, Index3 strata) {
  for (int a = 0; a < 3; ++a) {
    if (!(region.hi[a] > region.lo[a])) throw GeometryError("bed region is degenerate");
  }
  if (!(d_p > 0.0) || !(rho_p > 0.0) || !(omega >= 1.0))
    throw ConfigError("bed needs d_p > 0, rho_p > 0 and omega >= 1");
  const std::size_t n = bed_parcel_count(region, eps_p, d_p, omega);
  if (n == 0) throw ConfigError("bed region holds no parcels at this weight");

  Vec3 ext{};
  for (int a = 0; a < 3; ++a) ext[a] = region.hi[a] - region.lo[a];
  if (strata[0] <= 0 || strata[1] <= 0 || strata[2] <= 0) {
    const double side = std::cbrt(region.volume() / static_cast<double>(n));
    for (int a = 0; a < 3; ++a) strata[a] = std::max(1, static_cast<int>(std::floor(ext[a] / side)));
  }
  const std::uint64_t m =
      static_cast<std::uint64_t>(strata[0]) * strata[1] * strata[2];

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  ParcelSet ps;
  ps.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t cell = static_cast<std::uint64_t>(i) * m / n;
    const Index3 s{static_cast<int>(cell % strata[0]),
                   static_cast<int>((cell / strata[0]) % strata[1]),
                   static_cast<int>(cell / (static_cast<std::uint64_t>(strata[0]) * strata[1]))};
    Vec3 pos{};
    for (int a = 0; a < 3; ++a) {
      const double width = ext[a] / strata[a];
      pos[a] = region.lo[a] + (s[a] + unit(rng)) * width;
      pos[a] = std::min(pos[a], region.hi[a]);
    }
    ps.push_back(pos, {0.0, 0.0, 0.0}, d_p, rho_p, omega);
  }
  return ps;
}

Deposition deposit(const ParcelSet& parcels, const Mesh& mesh) {
  const GridSpec& g = mesh.grid;
  const std::size_t count = g.stored_count();
  Deposition out;
  out.eps_p.assign(count, 0.0);
  const double inv_vol = 1.0 / g.cell_volume();

  std::vector<std::size_t> home(parcels.size());
  out.cell_offsets.assign(count + 1, 0);
  for (std::size_t i = 0; i < parcels.size(); ++i) {
    const Vec3 pos = parcels.position(i);
    const InterpStencil st = trilinear_stencil(pos, g, Lattice::Cell);
    const double share = parcels.volume(i) * inv_vol;
    for (int m = 0; m < 8; ++m) {
      if (st.weight[m] == 0.0) continue;
      out.eps_p[fold_into_domain(st.node[m], g, Lattice::Cell)] += st.weight[m] * share;
    }
    home[i] = fold_into_domain(cell_of_point(pos, g), g, Lattice::Cell);
    ++out.cell_offsets[home[i] + 1];
  }
  for (std::size_t c = 0; c < count; ++c) out.cell_offsets[c + 1] += out.cell_offsets[c];
  out.cell_parcels.resize(parcels.size());
  std::vector<std::size_t> fill(out.cell_offsets.begin(), out.cell_offsets.end() - 1);
  for (std::size_t i = 0; i < parcels.size(); ++i) out.cell_parcels[fill[home[i]]++] = i;

  for (std::size_t c = 0; c < count; ++c) {
    if (out.eps_p[c] >= 1.0) ++out.overpacked_cells;
  }
  return out;
}

void set_volume_fractions(FieldState& state, std::span<const double> eps_p, const Mesh& mesh) {
  const GridSpec& g = mesh.grid;
  for (int k = 1; k <= g.n[2]; ++k)
    for (int j = 1; j <= g.n[1]; ++j)
      for (int i = 1; i <= g.n[0]; ++i) {
        const std::size_t idx = g.index(i, j, k);
        const double e = std::min(eps_p[idx], kMaxSolidsFraction);
        state.eps_p[idx] = e;
        state.eps_g[idx] = 1.0 - e;
      }
}

double snider_stress(double eps_p, const StressParams& params) {
  const double num = params.p_s * std::pow(eps_p, params.beta);
  const double den = std::max(params.eps_cp - eps_p, params.alpha * (1.0 - eps_p));
  return num / den;
}

void fill_ghosts_zero_gradient(Field& f, const GridSpec& g) {
  for (std::size_t idx = 0; idx < g.stored_count(); ++idx) {
    Index3 c = g.coords(idx);
    if (g.is_interior(c)) continue;
    for (int a = 0; a < 3; ++a) c[a] = std::clamp(c[a], 1, g.n[a]);
    f[idx] = f[g.index(c)];
  }
}

Field solids_stress(std::span<const double> eps_p, const GridSpec& g, const StressParams& params) {
  Field tau(g.stored_count(), 0.0);
  for (int k = 1; k <= g.n[2]; ++k)
    for (int j = 1; j <= g.n[1]; ++j)
      for (int i = 1; i <= g.n[0]; ++i) {
        const std::size_t idx = g.index(i, j, k);
        tau[idx] = snider_stress(eps_p[idx], params);
      }
  fill_ghosts_zero_gradient(tau, g);
  return tau;
}

std::array<Field, 3> face_gradient(std::span<const double> f, const GridSpec& g) {
  std::array<Field, 3> grad;
  for (int a = 0; a < 3; ++a) {
    grad[a].assign(g.stored_count(), 0.0);
    const std::size_t s = g.stride(a);
    const double inv_h = 1.0 / g.h[a];
    for (std::size_t idx = 0; idx < g.stored_count(); ++idx) {
      if (g.coords(idx)[a] > g.n[a]) continue;
      grad[a][idx] = (f[idx + s] - f[idx]) * inv_h;
    }
  }
  return grad;
}

void gather_parcel_gradients(const ParcelSet& parcels, const GridSpec& g,
                             const std::array<Field, 3>& grad_p,
                             const std::array<Field, 3>& grad_tau,
                             std::span<ParcelForcing> forcing) {
  for (std::size_t i = 0; i < parcels.size(); ++i) {
    const Vec3 pos = parcels.position(i);
    ParcelForcing& out = forcing[i];
    for (int a = 0; a < 3; ++a) {
      const Lattice lat = face_lattice(a);
      const InterpStencil st = fold_stencil(trilinear_stencil(pos, g, lat), g, lat);
      out.grad_p[a] = gather(grad_p[a], st);
      out.grad_tau[a] = gather(grad_tau[a], st);
    }
  }
}

namespace {

struct Crossing {
  int axis = -1;
  double plane = 0.0;
  bool outlet = false;
};

// Ghost cell across the domain boundary from `pos` along `axis`, tangential coordinates
// clamped into the interior.
std::size_t ghost_across(const Vec3& pos, const GridSpec& g, int axis, bool high) {
  Index3 c{};
  for (int a = 0; a < 3; ++a) {
    if (a == axis) {
      c[a] = high ? g.n[a] + 1 : 0;
    } else {
      const int i = static_cast<int>(std::floor((pos[a] - g.origin[a]) / g.h[a])) + 1;
      c[a] = std::clamp(i, 1, g.n[a]);
    }
  }
  return g.index(c);
}

void reflect(ParcelSet& ps, std::size_t i, int axis, double plane, const WallModel& wall) {
  Vec3 pos = ps.position(i);
  Vec3 vel = ps.velocity(i);
  pos[axis] = 2.0 * plane - pos[axis];
  for (int a = 0; a < 3; ++a) vel[a] = a == axis ? -wall.e_n * vel[a] : wall.e_t * vel[a];
  ps.set_position(i, pos);
  ps.set_velocity(i, vel);
}

Index3 cell_coords(const Vec3& pos, const GridSpec& g) {
  Index3 c{};
  for (int a = 0; a < 3; ++a) {
    const int i = static_cast<int>(std::floor((pos[a] - g.origin[a]) / g.h[a])) + 1;
    c[a] = std::clamp(i, 1, g.n[a]);
  }
  return c;
}

}  // namespace

ReflectReport reflect_walls(ParcelSet& ps, const Mesh& mesh, const WallModel& wall,
                            std::span<const Vec3> previous) {
  const GridSpec& g = mesh.grid;
  const bool has_blocked = !previous.empty() && mesh.flags.has(CellFlag::Blocked);
  ReflectReport report;
  std::vector<char> remove(ps.size(), 0);
  bool any_removed = false;

  for (std::size_t i = 0; i < ps.size(); ++i) {
    bool settled = false;
    for (int pass = 0; pass < 3 && !settled && !remove[i]; ++pass) {
      bool moved = false;
      for (int a = 0; a < 3 && !remove[i]; ++a) {
        const double lo = g.origin[a];
        const double hi = g.origin[a] + g.n[a] * g.h[a];
        const double x = ps.position(i)[a];
        if (!(x < lo) && !(x > hi)) continue;
        const bool high = x > hi;
        const std::size_t ghost = ghost_across(ps.position(i), g, a, high);
        if (mesh.flags[ghost] == CellFlag::Outlet) {
          remove[i] = 1;
          ++report.removed_outlet;
          break;
        }
        reflect(ps, i, a, high ? hi : lo, wall);
        ++report.reflections;
        moved = true;
      }
      if (remove[i]) break;

      if (has_blocked && inside_interior(ps.position(i), g)) {
        const Index3 cur = cell_coords(ps.position(i), g);
        if (mesh.flags[g.index(cur)] == CellFlag::Blocked) {
          const Index3 prev = cell_coords(previous[i], g);
          for (int a = 0; a < 3; ++a) {
            if (prev[a] == cur[a]) continue;
            Index3 probe = prev;
            probe[a] = cur[a];
            if (mesh.flags[g.index(probe)] != CellFlag::Blocked) continue;
            const int face = cur[a] > prev[a] ? cur[a] - 1 : cur[a];
            reflect(ps, i, a, g.origin[a] + face * g.h[a], wall);
            ++report.reflections;
            moved = true;
            break;
          }
        }
      }
      if (!moved) settled = true;
    }
    if (remove[i]) {
      any_removed = true;
      continue;
    }
    const Vec3 pos = ps.position(i);
    bool lost = !inside_interior(pos, g);
    if (!lost && has_blocked) lost = mesh.flags[g.index(cell_coords(pos, g))] == CellFlag::Blocked;
    if (lost) {
      remove[i] = 1;
      any_removed = true;
      ++report.removed_lost;
    }
  }
  if (any_removed) ps.erase_flagged(remove);
  return report;
}

AdvanceReport advance_parcels(ParcelSet& ps, double dt, std::span<const ParcelForcing> forcing,
                              const GasProps& gas, const Mesh& mesh, const WallModel& wall) {
  if (!(dt > 0.0)) throw SolverError("parcel advance needs dt > 0");
  const GridSpec& g = mesh.grid;
  const double cell = g.min_spacing();
  AdvanceReport report;
  std::vector<Vec3> previous(ps.size());

  for (std::size_t i = 0; i < ps.size(); ++i) {
    const ParcelForcing& f = forcing[i];
    const double rho_p = ps.rho[i];
    const double dd = dt * f.drag_rate;
    const bool stressed = f.eps_p > kSolidsFloor;
    const double stress_scale = stressed ? 1.0 / (std::max(f.eps_p, kSolidsFloor) * rho_p) : 0.0;
    const Vec3 pos = ps.position(i);
    Vec3 vel = ps.velocity(i);
    Vec3 next{};
    for (int a = 0; a < 3; ++a) {
      const double accel = -f.grad_p[a] / rho_p + gas.gravity[a] - f.grad_tau[a] * stress_scale;
      vel[a] = (vel[a] + dt * accel + dd * f.gas_velocity[a]) / (1.0 + dd);
      next[a] = pos[a] + dt * vel[a];
      if (!std::isfinite(vel[a]) || !std::isfinite(next[a])) {
        std::string where = "?";
        try {
          where = std::to_string(cell_of_point(pos, g));
        } catch (const GeometryError&) {
        }
        throw SolverError("non-finite parcel update: parcel " + std::to_string(i) + " in cell " + where);
      }
      report.max_displacement = std::max(report.max_displacement, std::abs(next[a] - pos[a]));
    }
    previous[i] = pos;
    ps.set_velocity(i, vel);
    ps.set_position(i, next);
  }
  report.displacement_ok = report.max_displacement <= cell;
  report.reflect = reflect_walls(ps, mesh, wall, previous);
  return report;
}

}  // namespace mppic
