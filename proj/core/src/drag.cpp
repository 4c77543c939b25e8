#include "mppic/drag.hpp"

#include <algorithm>
#include <cmath>

namespace mppic {

double particle_reynolds(double slip_speed, double d_p, const GasProps& gas) {
  return gas.rho_g * d_p * std::abs(slip_speed) / gas.mu_g;
}

double terminal_velocity_ratio(double eps_g, double re) {
  const double a = std::pow(eps_g, 4.14);
  const double b = eps_g <= 0.85 ? 0.8 * std::pow(eps_g, 1.28) : std::pow(eps_g, 2.65);
  const double r = 0.06 * re;
  return 0.5 * (a - r + std::sqrt(r * r + 0.12 * re * (2.0 * b - a) + a * a));
}

double syamlal_obrien_coefficient(double eps_g, double slip_speed, double d_p, const GasProps& gas) {
  const double slip = std::abs(slip_speed);
  if (slip == 0.0) return 0.0;
  const double re = particle_reynolds(slip, d_p, gas);
  const double vr = terminal_velocity_ratio(eps_g, re);
  const double c = 0.63 + 4.8 * std::sqrt(vr / std::max(re, kReynoldsFloor));
  const double cd = c * c;
  const double eps_p = 1.0 - eps_g;
  return 0.75 * cd * eps_p * eps_g * gas.rho_g * slip / (vr * vr * d_p);
}

ParcelDrag compute_parcel_drag(const ParcelSet& parcels, const FieldState& fields,
                               const GridSpec& grid, const GasProps& gas) {
  ParcelDrag out;
  const std::size_t n = parcels.size();
  out.rate.resize(n);
  out.gas_velocity.resize(n);
  out.eps_p.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 pos = parcels.position(i);
    const InterpStencil cs = fold_stencil(trilinear_stencil(pos, grid, Lattice::Cell), grid, Lattice::Cell);
    const double eps_g = gather(fields.eps_g, cs);
    Vec3 ug{};
    for (int a = 0; a < 3; ++a) {
      const Lattice lat = face_lattice(a);
      ug[a] = gather(fields.velocity(a), fold_stencil(trilinear_stencil(pos, grid, lat), grid, lat));
    }
    const Vec3 up = parcels.velocity(i);
    const double dx = ug[0] - up[0];
    const double dy = ug[1] - up[1];
    const double dz = ug[2] - up[2];
    const double slip = std::sqrt(dx * dx + dy * dy + dz * dz);
    const double eps_p = 1.0 - eps_g;
    const double beta = syamlal_obrien_coefficient(eps_g, slip, parcels.d[i], gas);
    out.rate[i] = beta / (std::max(eps_p, kSolidsFloor) * parcels.rho[i]);
    out.gas_velocity[i] = ug;
    out.eps_p[i] = eps_p;
  }
  return out;
}

Vec3 parcel_drag_force(const ParcelSet& parcels, const ParcelDrag& drag, std::size_t i) {
  const double c = parcels.mass(i) * drag.rate[i];
  const Vec3 up = parcels.velocity(i);
  const Vec3& ug = drag.gas_velocity[i];
  return {c * (ug[0] - up[0]), c * (ug[1] - up[1]), c * (ug[2] - up[2])};
}

FaceCoupling accumulate_F(const ParcelSet& parcels, const ParcelDrag& drag, const FieldState& fields,
                          const GridSpec& grid) {
  FaceCoupling out;
  const std::size_t count = grid.stored_count();
  const double inv_vol = 1.0 / grid.cell_volume();
  for (int a = 0; a < 3; ++a) {
    out.force[a].assign(count, 0.0);
    out.coefficient[a].assign(count, 0.0);
    out.reference[a] = fields.velocity(a);
  }
  for (std::size_t i = 0; i < parcels.size(); ++i) {
    const Vec3 pos = parcels.position(i);
    const Vec3 f = parcel_drag_force(parcels, drag, i);
    const double c = parcels.mass(i) * drag.rate[i];
    for (int a = 0; a < 3; ++a) {
      const Lattice lat = face_lattice(a);
      const InterpStencil st = trilinear_stencil(pos, grid, lat);
      for (int m = 0; m < 8; ++m) {
        if (st.weight[m] == 0.0) continue;
        const std::size_t node = fold_into_domain(st.node[m], grid, lat);
        out.force[a][node] += st.weight[m] * f[a] * inv_vol;
        out.coefficient[a][node] += st.weight[m] * c * inv_vol;
      }
    }
  }
  return out;
}

}  // namespace mppic
