#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "mppic/equation_system.hpp"
#include "mppic/grid.hpp"

namespace mppic {

/// Eulerian gas-phase state on the staggered mesh. Every array has one entry per stored
/// cell; u, v, w and the drag force densities live on the face lattices.
struct FieldState {
  Field eps_g;  ///< gas volume fraction
  Field p;      ///< gauge pressure [Pa]
  Field u, v, w;
  Field eps_p;  ///< solids volume fraction
  Field f_x, f_y, f_z;  ///< interphase force density on faces [N/m^3]

  FieldState() = default;
  explicit FieldState(const GridSpec& grid);

  Field& velocity(int axis) { return axis == 0 ? u : (axis == 1 ? v : w); }
  const Field& velocity(int axis) const { return axis == 0 ? u : (axis == 1 ? v : w); }
  Field& force(int axis) { return axis == 0 ? f_x : (axis == 1 ? f_y : f_z); }
  const Field& force(int axis) const { return axis == 0 ? f_x : (axis == 1 ? f_y : f_z); }

  bool operator==(const FieldState&) const = default;
};

struct GasProps {
  double rho_g = 1.0;
  double mu_g = 1.8e-5;
  double p_ref = 101325.0;
  Vec3 gravity{0.0, 0.0, -9.81};

  bool operator==(const GasProps&) const = default;
};

struct BoundarySpec {
  std::optional<double> inlet_velocity;  ///< speed into the domain [m/s]
  double outlet_pressure = 0.0;          ///< gauge [Pa]

  bool operator==(const BoundarySpec&) const = default;
};

/// Normalized residuals of one SIMPLE iteration.
struct ResidualRecord {
  int iteration = 0;
  double continuity = 0.0;
  double u = 0.0;
  double v = 0.0;
  double w = 0.0;

  double momentum(int axis) const { return axis == 0 ? u : (axis == 1 ? v : w); }
  double& momentum(int axis) { return axis == 0 ? u : (axis == 1 ? v : w); }
};

enum class FaceKind : unsigned char {
  Active,   ///< unknown of the momentum equation (fluid|fluid or fluid|outlet)
  Fixed,    ///< prescribed normal velocity (wall, obstacle, inlet)
  Outside,  ///< not a physical face; carries a ghost value only
};

/// Classification of the face between stored cell `idx` and its +axis neighbour.
FaceKind classify_face(const Mesh& mesh, int axis, std::size_t idx);

/// Prescribed velocity of a Fixed face (0 unless it borders an inlet).
double fixed_face_velocity(const Mesh& mesh, const BoundarySpec& bc, int axis, std::size_t idx);

/// True when an Outside face should copy (rather than negate) its interior mirror, i.e.
/// it touches an outlet.
bool outside_face_zero_gradient(const Mesh& mesh, int axis, std::size_t idx);

/// Sets every prescribed face velocity and every ghost value (velocity, pressure,
/// volume fractions) from the interior state.
/// Throws GeometryError when `bc` names a boundary type absent from the mesh.
void apply_boundary_conditions(FieldState& state, const Mesh& mesh, const BoundarySpec& bc);

/// Face volume fraction used for mass fluxes: upwind with respect to `face_velocity`.
inline double upwind_eps(double eps_minus, double eps_plus, double face_velocity) {
  return face_velocity >= 0.0 ? eps_minus : eps_plus;
}

/// Mass imbalance per cell [kg/s]: inflow minus outflow minus accumulation. Zero outside
/// FLUID cells. `eps_g_old` and `dt` give the transient term; pass an empty span for a
/// steady evaluation.
Field continuity_imbalance(const FieldState& state, const Mesh& mesh, const GasProps& gas,
                           std::span<const double> eps_g_old = {}, double dt = 0.0);

/// Sum over FLUID cells of |b| divided by norm_g.
double continuity_residual(std::span<const double> imbalance, const Mesh& mesh,
                           double norm_g = 1.0);

/// Sum |a_P x_P - sum a_nb x_nb - rhs| / max(sum |a_P x_P|, sum source scale, 1e-30),
/// evaluated at `values` (defaults to sys.x).
double momentum_residual(const EquationSystem& sys, std::span<const double> values = {});

/// Gas mass flow [kg/s] through all inlet faces (positive into the domain) and outlet faces
/// (positive out of the domain).
struct BoundaryFlux {
  double inflow = 0.0;
  double outflow = 0.0;
};
BoundaryFlux boundary_mass_flux(const FieldState& state, const Mesh& mesh, const GasProps& gas);

/// Mean inlet gauge pressure (linearly extrapolated to the inlet plane) minus the outlet
/// gauge pressure.
double inlet_outlet_pressure_drop(const FieldState& state, const Mesh& mesh,
                                  const BoundarySpec& bc);

/// Absolute pressure for output.
inline double absolute_pressure(double gauge, const GasProps& gas) { return gauge + gas.p_ref; }

}  // namespace mppic
