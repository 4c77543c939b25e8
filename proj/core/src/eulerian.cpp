#include "mppic/eulerian.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <string>
#include <vector>

#include "mppic/error.hpp"

namespace mppic {

void SimpleConfig::validate() const {
  if (!(tol_continuity > 0.0) || !(tol_momentum > 0.0)) throw ConfigError("tolerances must be positive");
  if (max_outer < 1) throw ConfigError("max_outer must be at least 1");
  if (!(urf_mom > 0.0 && urf_mom <= 1.0) || !(urf_p > 0.0 && urf_p <= 1.0))
    throw ConfigError("under-relaxation factors must lie in (0, 1]");
  if (!(lin_tol_mom > 0.0) || !(lin_tol_p > 0.0) || lin_maxit_mom < 1 || lin_maxit_p < 1)
    throw ConfigError("linear solver settings must be positive");
  if (!(norm_g > 0.0)) throw ConfigError("norm_g must be positive");
}

void TimeController::validate() const {
  if (!(dt_min > 0.0) || !(dt_min <= dt_max)) throw ConfigError("need 0 < dt_min <= dt_max");
  if (!(dt >= dt_min && dt <= dt_max)) throw ConfigError("dt must lie in [dt_min, dt_max]");
  if (!(grow_factor > 1.0)) throw ConfigError("grow_factor must exceed 1");
  if (!(shrink_factor > 0.0 && shrink_factor < 1.0)) throw ConfigError("shrink_factor must lie in (0, 1)");
  if (grow_threshold < 0) throw ConfigError("grow_threshold must be non-negative");
}

StepVerdict adapt_dt(TimeController& tc, int outer_iterations, bool converged, bool cfl_ok) {
  if (!converged || !cfl_ok) {
    if (tc.dt <= tc.dt_min) return StepVerdict::AcceptAtFloor;
    tc.dt = std::max(tc.dt * tc.shrink_factor, tc.dt_min);
    return StepVerdict::Retry;
  }
  if (outer_iterations <= tc.grow_threshold) {
    tc.dt = std::min(tc.dt * tc.grow_factor, tc.dt_max);
    return StepVerdict::Grow;
  }
  return StepVerdict::Keep;
}

namespace {

std::vector<FaceKind> face_kinds(const Mesh& mesh, int axis) {
  std::vector<FaceKind> kind(mesh.grid.stored_count());
  for (std::size_t idx = 0; idx < kind.size(); ++idx) kind[idx] = classify_face(mesh, axis, idx);
  return kind;
}

[[noreturn]] void bad_coefficient(const char* what, int axis, std::size_t row, const GridSpec& g) {
  const Index3 c = g.coords(row);
  throw SolverError(std::string("non-finite ") + what + " in momentum row of axis " +
                    std::to_string(axis) + " at (" + std::to_string(c[0]) + "," +
                    std::to_string(c[1]) + "," + std::to_string(c[2]) + ")");
}

}  // namespace

EquationSystem assemble_momentum(int a, const MomentumInputs& in, double dt, const GasProps& gas,
                                 const Mesh& mesh, double urf) {
  const GridSpec& g = mesh.grid;
  const FieldState& cur = in.current;
  const Field& vel = cur.velocity(a);
  const Field& vel_old = in.old.velocity(a);
  const Field& eps = cur.eps_g;
  const std::size_t count = g.stored_count();
  const std::size_t sa = g.stride(a);
  const double vol = g.cell_volume();
  const double rho = gas.rho_g;
  const double mu = gas.mu_g;
  const std::vector<FaceKind> kind = face_kinds(mesh, a);

  EquationSystem sys(g);
  sys.x = vel;
  sys.rhs = vel;

  for (std::size_t P = 0; P < count; ++P) {
    if (kind[P] != FaceKind::Active) continue;
    sys.active.push_back(P);
    const Index3 c = g.coords(P);
    const std::size_t E = P + sa;
    const double eps_f = 0.5 * (eps[P] + eps[E]);
    const double eps_f_old = 0.5 * (in.old.eps_g[P] + in.old.eps_g[E]);
    double sum_nb = 0.0;
    double rhs = 0.0;
    double scale = 0.0;

    for (int b = 0; b < 3; ++b) {
      const std::size_t sb = g.stride(b);
      const double area = g.face_area(b);
      const double inv_h = 1.0 / g.h[b];
      for (const int side : {-1, 1}) {
        // The minus neighbour along the own axis does not exist for a face on the low ghost
        // layer (outlet on the low side); it behaves as zero-gradient.
        const bool missing = b == a && side < 0 && c[a] == 0;
        double flux;
        double eps_c;
        if (b == a) {
          const std::size_t cc = side > 0 ? E : P;
          eps_c = eps[cc];
          const double lo = side > 0 ? vel[P] : (missing ? vel[P] : vel[P - sa]);
          const double hi = side > 0 ? vel[E] : vel[P];
          flux = rho * eps_c * 0.5 * (lo + hi) * area;
        } else {
          const Field& vb = cur.velocity(b);
          const std::size_t f0 = side > 0 ? P : P - sb;
          const std::size_t q = side > 0 ? P + sb : P - sb;
          eps_c = 0.25 * (eps[P] + eps[E] + eps[q] + eps[q + sa]);
          flux = rho * eps_c * 0.5 * (vb[f0] + vb[f0 + sa]) * area;
        }
        const double coef = mu * eps_c * area * inv_h + std::max(side > 0 ? -flux : flux, 0.0);
        if (missing) continue;
        const std::size_t nb = side > 0 ? P + sb : P - sb;
        switch (kind[nb]) {
          case FaceKind::Active:
            sys.a_nb[neighbour_slot(b, side)][P] = coef;
            sum_nb += coef;
            break;
          case FaceKind::Fixed:
            sum_nb += coef;
            rhs += coef * vel[nb];
            scale += std::abs(coef * vel[nb]);
            break;
          case FaceKind::Outside:
            if (!outside_face_zero_gradient(mesh, a, nb)) sum_nb += 2.0 * coef;
            break;
        }
      }
    }

    const double a0 = rho * eps_f_old * vol / dt;
    const double transient = a0 * vel_old[P];
    const double pressure = -eps_f * (cur.p[E] - cur.p[P]) * g.face_area(a);
    const double gravity = eps_f * rho * gas.gravity[a] * vol;
    rhs += transient + pressure + gravity;
    scale += std::abs(transient) + std::abs(pressure) + std::abs(gravity);

    double a_p = sum_nb + a0;
    if (in.coupling) {
      const double k = in.coupling->coefficient[a][P] * vol;
      const double drag = (-in.coupling->force[a][P] + in.coupling->coefficient[a][P] * in.coupling->reference[a][P]) * vol;
      a_p += k;
      rhs += drag;
      scale += std::abs(drag);
    }

    const double a_relaxed = a_p / urf;
    rhs += (1.0 - urf) * a_relaxed * vel[P];
    if (!std::isfinite(a_relaxed) || !(a_relaxed > 0.0)) bad_coefficient("diagonal", a, P, g);
    if (!std::isfinite(rhs)) bad_coefficient("source", a, P, g);
#ifndef NDEBUG
    double off = 0.0;
    for (int s = 0; s < 6; ++s) off += std::abs(sys.a_nb[s][P]);
    assert(a_relaxed >= off);
#endif
    sys.a_p[P] = a_relaxed;
    sys.rhs[P] = rhs;
    sys.source_scale[P] = scale;
  }
  return sys;
}

EquationSystem assemble_pressure_correction(const FieldState& starred,
                                            const std::array<const EquationSystem*, 3>& momentum,
                                            std::span<const double> eps_g_old, double dt,
                                            const GasProps& gas, const Mesh& mesh,
                                            Field* imbalance) {
  const GridSpec& g = mesh.grid;
  const Field& eps = starred.eps_g;
  EquationSystem sys(g);
  Field b = continuity_imbalance(starred, mesh, gas, eps_g_old, dt);
  std::array<std::vector<FaceKind>, 3> kind{face_kinds(mesh, 0), face_kinds(mesh, 1), face_kinds(mesh, 2)};

  for (int k = 1; k <= g.n[2]; ++k)
    for (int j = 1; j <= g.n[1]; ++j)
      for (int i = 1; i <= g.n[0]; ++i) {
        const std::size_t P = g.index(i, j, k);
        if (mesh.flags[P] != CellFlag::Fluid) {
          sys.rhs[P] = 0.0;
          continue;
        }
        double a_p = 0.0;
        for (int a = 0; a < 3; ++a) {
          const std::size_t sa = g.stride(a);
          const double area = g.face_area(a);
          const Field& vel = starred.velocity(a);
          for (const int side : {-1, 1}) {
            const std::size_t face = side > 0 ? P : P - sa;
            if (kind[a][face] != FaceKind::Active) continue;
            const std::size_t nb = side > 0 ? P + sa : P - sa;
            const double eps_bar = 0.5 * (eps[face] + eps[face + sa]);
            const double eps_up = upwind_eps(eps[face], eps[face + sa], vel[face]);
            const double d = gas.rho_g * area * area * eps_up * eps_bar / momentum[a]->a_p[face];
            if (mesh.flags[nb] == CellFlag::Fluid) {
              sys.a_nb[neighbour_slot(a, side)][P] = d;
              a_p += d;
            } else {
              a_p += 2.0 * d;
            }
          }
        }
        if (!(a_p > 0.0) || !std::isfinite(a_p)) {
          throw SolverError("zero diagonal in the pressure-correction row of cell (" + std::to_string(i) +
                            "," + std::to_string(j) + "," + std::to_string(k) + ")");
        }
        sys.a_p[P] = a_p;
        sys.rhs[P] = b[P];
        sys.active.push_back(P);
      }

  if (!mesh.flags.has(CellFlag::Outlet) && !sys.active.empty()) {
    const std::size_t pin = sys.active.front();
    sys.active.erase(sys.active.begin());
    sys.a_p[pin] = 1.0;
    sys.rhs[pin] = 0.0;
    for (int s = 0; s < 6; ++s) {
      sys.a_nb[s][pin] = 0.0;
      const std::size_t nb = sys.neighbour_index(pin, s);
      sys.a_nb[s ^ 1][nb] = 0.0;
    }
  }
  if (imbalance) *imbalance = std::move(b);
  return sys;
}

SolveResult solve_bicgstab(EquationSystem& sys, double tol, int maxit) {
  const std::size_t n = sys.size();
  const std::vector<std::size_t>& act = sys.active;
  Field& x = sys.x;
  {
    std::vector<char> mask(n, 0);
    for (const std::size_t r : act) mask[r] = 1;
    for (std::size_t r = 0; r < n; ++r)
      if (!mask[r]) x[r] = sys.rhs[r];
  }
  auto dot = [&](const Field& p, const Field& q) {
    double s = 0.0;
    for (const std::size_t r : act) s += p[r] * q[r];
    return s;
  };

  SolveResult res;
  const double bnorm = std::sqrt(dot(sys.rhs, sys.rhs));
  if (bnorm == 0.0) {
    for (const std::size_t r : act) x[r] = 0.0;
    res.converged = true;
    return res;
  }

  Field r(n, 0.0), r_hat(n, 0.0), p(n, 0.0), v(n, 0.0), s(n, 0.0), t(n, 0.0);
  auto true_residual = [&]() {
    sys.multiply(x, t);
    for (const std::size_t i : act) r[i] = sys.rhs[i] - t[i];
  };
  true_residual();
  double rel = std::sqrt(dot(r, r)) / bnorm;
  Field best = x;
  double best_rel = rel;
  res.residual = rel;
  if (rel <= tol) {
    res.converged = true;
    return res;
  }

  double rho = 1.0, alpha = 1.0, omega = 1.0;
  auto restart = [&]() {
    true_residual();
    r_hat = r;
    std::fill(p.begin(), p.end(), 0.0);
    std::fill(v.begin(), v.end(), 0.0);
    rho = alpha = omega = 1.0;
  };
  restart();

  bool breakdown = false;
  for (int it = 1; it <= maxit; ++it) {
    res.iterations = it;
    const double rho_new = dot(r_hat, r);
    const double guard = 1e-30 * std::sqrt(dot(r_hat, r_hat) * dot(r, r));
    bool broke = std::abs(rho_new) <= guard || omega == 0.0;
    double den = 0.0;
    if (!broke) {
      const double beta = (rho_new / rho) * (alpha / omega);
      for (const std::size_t i : act) p[i] = r[i] + beta * (p[i] - omega * v[i]);
      sys.multiply(p, v);
      den = dot(r_hat, v);
      broke = den == 0.0;
    }
    if (broke) {
      if (res.restarts > 0) {
        breakdown = true;
        break;
      }
      ++res.restarts;
      restart();
      continue;
    }
    alpha = rho_new / den;
    for (const std::size_t i : act) s[i] = r[i] - alpha * v[i];
    const double s_rel = std::sqrt(dot(s, s)) / bnorm;
    if (s_rel <= tol) {
      for (const std::size_t i : act) x[i] += alpha * p[i];
      rel = s_rel;
      if (rel < best_rel) best_rel = rel, best = x;
      res.converged = true;
      break;
    }
    sys.multiply(s, t);
    const double tt = dot(t, t);
    omega = tt > 0.0 ? dot(t, s) / tt : 0.0;
    for (const std::size_t i : act) {
      x[i] += alpha * p[i] + omega * s[i];
      r[i] = s[i] - omega * t[i];
    }
    rho = rho_new;
    rel = std::sqrt(dot(r, r)) / bnorm;
    if (!std::isfinite(rel)) {
      breakdown = true;
      break;
    }
    if (rel < best_rel) best_rel = rel, best = x;
    if (rel <= tol) {
      res.converged = true;
      break;
    }
  }
  (void)breakdown;
  if (!res.converged || rel > best_rel) {
    x = best;
    rel = best_rel;
  }
  res.residual = rel;
  return res;
}

void correct_fields(FieldState& state, std::span<const double> p_prime,
                    const std::array<const EquationSystem*, 3>& momentum, double urf_p,
                    const Mesh& mesh, const BoundarySpec& bc) {
  const GridSpec& g = mesh.grid;
  const std::size_t count = g.stored_count();
  auto cell_value = [&](std::size_t c, std::size_t other) {
    const CellFlag f = mesh.flags[c];
    if (f == CellFlag::Fluid) return p_prime[c];
    if (f == CellFlag::Outlet) return -p_prime[other];
    return 0.0;
  };
  for (int a = 0; a < 3; ++a) {
    Field& vel = state.velocity(a);
    const std::size_t sa = g.stride(a);
    const double area = g.face_area(a);
    for (std::size_t P = 0; P < count; ++P) {
      if (classify_face(mesh, a, P) != FaceKind::Active) continue;
      const std::size_t E = P + sa;
      const double eps_bar = 0.5 * (state.eps_g[P] + state.eps_g[E]);
      const double dp = cell_value(P, E) - cell_value(E, P);
      vel[P] += eps_bar * area / momentum[a]->a_p[P] * dp;
    }
  }
  for (std::size_t c = 0; c < count; ++c) {
    if (mesh.flags[c] == CellFlag::Fluid) state.p[c] += urf_p * p_prime[c];
  }
  apply_boundary_conditions(state, mesh, bc);
}

void hydrostatic_pressure(FieldState& state, const Mesh& mesh, const GasProps& gas,
                          const BoundarySpec& bc) {
  const GridSpec& g = mesh.grid;
  Vec3 anchor = g.origin;
  double anchor_p = 0.0;
  std::size_t outlets = 0;
  Vec3 sum{};
  for (std::size_t idx = 0; idx < g.stored_count(); ++idx) {
    if (mesh.flags[idx] != CellFlag::Outlet) continue;
    const Index3 c = g.coords(idx);
    Vec3 x = g.cell_center(c);
    for (int a = 0; a < 3; ++a) {
      if (c[a] == 0) x[a] = g.origin[a];
      if (c[a] == g.n[a] + 1) x[a] = g.origin[a] + g.n[a] * g.h[a];
    }
    for (int a = 0; a < 3; ++a) sum[a] += x[a];
    ++outlets;
  }
  if (outlets > 0) {
    for (int a = 0; a < 3; ++a) anchor[a] = sum[a] / static_cast<double>(outlets);
    anchor_p = bc.outlet_pressure;
  }
  for (int k = 1; k <= g.n[2]; ++k)
    for (int j = 1; j <= g.n[1]; ++j)
      for (int i = 1; i <= g.n[0]; ++i) {
        const std::size_t idx = g.index(i, j, k);
        const Vec3 x = g.cell_center({i, j, k});
        double p = anchor_p;
        for (int a = 0; a < 3; ++a) p += gas.rho_g * gas.gravity[a] * (x[a] - anchor[a]);
        state.p[idx] = p;
      }
  apply_boundary_conditions(state, mesh, bc);
}

}  // namespace mppic
