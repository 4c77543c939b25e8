#pragma once

#include <array>
#include <vector>

#include "mppic/fields.hpp"
#include "mppic/grid.hpp"
#include "mppic/parcels.hpp"

namespace mppic {

inline constexpr double kReynoldsFloor = 1e-12;

/// Particle Reynolds number rho_g d |slip| / mu_g.
double particle_reynolds(double slip_speed, double d_p, const GasProps& gas);

/// Terminal velocity ratio V_r of the Syamlal-O'Brien closure.
double terminal_velocity_ratio(double eps_g, double re);

/// Syamlal-O'Brien drag coefficient beta_d [kg/(m^3 s)] with eps_p = 1 - eps_g.
double syamlal_obrien_coefficient(double eps_g, double slip_speed, double d_p, const GasProps& gas);

/// Per-parcel drag state evaluated against one gas snapshot.
struct ParcelDrag {
  std::vector<double> rate;         ///< D = beta_d / (eps_p rho_p) [1/s]
  std::vector<Vec3> gas_velocity;   ///< u_g interpolated to the parcel
  std::vector<double> eps_p;        ///< solids fraction interpolated to the parcel

  std::size_t size() const { return rate.size(); }
};

/// Evaluates the closure at every parcel. Throws GeometryError for parcels outside the
/// interior.
ParcelDrag compute_parcel_drag(const ParcelSet& parcels, const FieldState& fields,
                               const GridSpec& grid, const GasProps& gas);

/// Drag force on parcel i exerted by the gas [N]: m_p D (u_g - u_p).
Vec3 parcel_drag_force(const ParcelSet& parcels, const ParcelDrag& drag, std::size_t i);

/// Interphase coupling on the face lattices.
///
/// `force` is the density of the force the gas exerts on the parcels (so the gas momentum
/// equation carries -force). `coefficient` holds the scattered m_p D / V; together with
/// `reference` (gas face velocities at evaluation time) it lets the momentum equation treat
/// the gas-velocity dependence of the force implicitly:
///   force(u) ~ force + coefficient (u - reference).
struct FaceCoupling {
  std::array<Field, 3> force;
  std::array<Field, 3> coefficient;
  std::array<Field, 3> reference;
};

/// Scatters per-parcel forces and coefficients to the face lattices, parcel order ascending.
FaceCoupling accumulate_F(const ParcelSet& parcels, const ParcelDrag& drag, const FieldState& fields,
                          const GridSpec& grid);

}  // namespace mppic
