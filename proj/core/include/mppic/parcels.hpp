#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mppic/fields.hpp"
#include "mppic/grid.hpp"

namespace mppic {

inline constexpr double kPi = 3.14159265358979323846;

/// Lagrangian parcels stored as parallel arrays. Each parcel carries `omega` identical
/// spherical particles of diameter `d` and material density `rho`.
struct ParcelSet {
  std::vector<double> x, y, z;
  std::vector<double> u, v, w;
  std::vector<double> d, rho, omega;

  std::size_t size() const { return x.size(); }
  bool empty() const { return x.empty(); }

  Vec3 position(std::size_t i) const { return {x[i], y[i], z[i]}; }
  Vec3 velocity(std::size_t i) const { return {u[i], v[i], w[i]}; }
  void set_position(std::size_t i, const Vec3& p) { x[i] = p[0], y[i] = p[1], z[i] = p[2]; }
  void set_velocity(std::size_t i, const Vec3& q) { u[i] = q[0], v[i] = q[1], w[i] = q[2]; }

  double particle_volume(std::size_t i) const { return kPi / 6.0 * d[i] * d[i] * d[i]; }
  /// Solid volume represented by the parcel: omega * particle volume.
  double volume(std::size_t i) const { return omega[i] * particle_volume(i); }
  double mass(std::size_t i) const { return rho[i] * volume(i); }

  void push_back(const Vec3& pos, const Vec3& vel, double diameter, double density, double weight);
  void reserve(std::size_t n);
  /// Drops parcels whose flag is set, preserving the order of the rest.
  void erase_flagged(const std::vector<char>& remove);

  bool operator==(const ParcelSet&) const = default;
};

struct StressParams {
  double p_s = 100.0;   ///< [Pa]
  double beta = 3.0;
  double eps_cp = 0.6;  ///< close-pack solids fraction
  double alpha = 1e-7;

  bool operator==(const StressParams&) const = default;
};

struct WallModel {
  double e_n = 0.85;  ///< normal restitution
  double e_t = 1.0;   ///< tangential retention

  bool operator==(const WallModel&) const = default;
};

struct Box {
  Vec3 lo{};
  Vec3 hi{};
  double volume() const { return (hi[0] - lo[0]) * (hi[1] - lo[1]) * (hi[2] - lo[2]); }
  bool operator==(const Box&) const = default;
};

/// floor(eps_p * V_region / (omega * pi/6 * d^3)).
std::size_t bed_parcel_count(const Box& region, double eps_p, double d_p, double omega);

/// Seeds a packed bed. Parcels are spread over `strata` equal sub-boxes (one parcel per
/// sub-box by default) and placed uniformly at random inside each, so the deposited solids
/// fraction is nearly uniform. Reproducible for a given seed. Velocities start at zero.
ParcelSet populate_bed(const Box& region, double eps_p, double d_p, double rho_p, double omega,
                       std::uint64_t seed, Index3 strata = {0, 0, 0});

struct Deposition {
  Field eps_p;  ///< solids fraction per stored cell; ghost contributions folded inward
  /// Parcels binned per stored cell in CSR form: parcels of cell c are
  /// cell_parcels[cell_offsets[c] .. cell_offsets[c+1]).
  std::vector<std::size_t> cell_offsets;
  std::vector<std::size_t> cell_parcels;
  std::size_t overpacked_cells = 0;
};

/// Trilinear parcel-to-cell deposition in parcel order.
Deposition deposit(const ParcelSet& parcels, const Mesh& mesh);

/// Largest solids fraction stored in the Eulerian field; deposits above it are reported as
/// over-packing and clipped so that eps_g stays positive.
inline constexpr double kMaxSolidsFraction = 0.99;

/// Writes eps_p and eps_g = 1 - eps_p into the interior cells of `state`.
void set_volume_fractions(FieldState& state, std::span<const double> eps_p, const Mesh& mesh);

/// Snider frictional stress: p_s eps^beta / max(eps_cp - eps, alpha (1 - eps)).
double snider_stress(double eps_p, const StressParams& params);

/// Pointwise stress on interior cells; ghosts copy their interior neighbour.
Field solids_stress(std::span<const double> eps_p, const GridSpec& grid, const StressParams& params);

/// Central difference across every face of the three face lattices.
std::array<Field, 3> face_gradient(std::span<const double> cell_field, const GridSpec& grid);

inline std::array<Field, 3> stress_gradient(std::span<const double> tau, const GridSpec& grid) {
  return face_gradient(tau, grid);
}

/// Copies the nearest interior value into every ghost cell.
void fill_ghosts_zero_gradient(Field& cell_field, const GridSpec& grid);

/// Gas-side quantities interpolated to one parcel.
struct ParcelForcing {
  Vec3 gas_velocity{};
  Vec3 grad_p{};
  Vec3 grad_tau{};
  double drag_rate = 0.0;  ///< D = beta_d / (eps_p rho_p) [1/s]
  double eps_p = 0.0;
};

inline constexpr double kSolidsFloor = 1e-8;

/// Fills grad_p, grad_tau and eps_p of `forcing` by trilinear interpolation.
void gather_parcel_gradients(const ParcelSet& parcels, const GridSpec& grid,
                             const std::array<Field, 3>& grad_p,
                             const std::array<Field, 3>& grad_tau,
                             std::span<ParcelForcing> forcing);

struct ReflectReport {
  std::size_t reflections = 0;
  std::size_t removed_outlet = 0;
  std::size_t removed_lost = 0;
};

struct AdvanceReport {
  double max_displacement = 0.0;
  bool displacement_ok = true;  ///< max displacement within one cell
  ReflectReport reflect;
};

/// Mirrors parcels that left the interior back across the crossed plane: normal velocity
/// times -e_n, tangential velocity times e_t. Parcels leaving through an outlet are
/// removed, parcels still outside after three passes are dropped and counted as lost.
/// With `previous` positions, entries into blocked cells are reflected as well.
ReflectReport reflect_walls(ParcelSet& parcels, const Mesh& mesh, const WallModel& wall,
                            std::span<const Vec3> previous = {});

/// Semi-implicit velocity update followed by the position update and wall reflection.
/// Throws SolverError on non-finite forcing or results.
AdvanceReport advance_parcels(ParcelSet& parcels, double dt, std::span<const ParcelForcing> forcing,
                              const GasProps& gas, const Mesh& mesh, const WallModel& wall);

}  // namespace mppic
