#pragma once

#include <array>
#include <span>

#include "mppic/drag.hpp"
#include "mppic/equation_system.hpp"
#include "mppic/fields.hpp"
#include "mppic/grid.hpp"

namespace mppic {

struct SimpleConfig {
  double tol_continuity = 1e-3;
  double tol_momentum = 1e-3;
  int max_outer = 500;
  double urf_mom = 0.7;
  double urf_p = 0.7;
  double lin_tol_mom = 1e-4;
  int lin_maxit_mom = 20;
  double lin_tol_p = 1e-6;
  int lin_maxit_p = 500;
  double norm_g = 1.0;

  bool converged(const ResidualRecord& r) const {
    return r.continuity < tol_continuity && r.u < tol_momentum && r.v < tol_momentum &&
           r.w < tol_momentum;
  }
  void validate() const;
  bool operator==(const SimpleConfig&) const = default;
};

struct TimeController {
  double dt = 1e-3;
  double dt_min = 1e-7;
  double dt_max = 1e-3;
  double grow_factor = 1.1;
  double shrink_factor = 0.5;
  int grow_threshold = 8;

  bool at_floor() const { return dt <= dt_min; }
  void validate() const;
  bool operator==(const TimeController&) const = default;
};

enum class StepVerdict { Grow, Keep, Retry, AcceptAtFloor };

/// Applies the step-size rule after an attempt and returns what happened to the step.
/// Retry means the attempt is rejected and dt has been reduced.
StepVerdict adapt_dt(TimeController& tc, int outer_iterations, bool converged, bool cfl_ok);

/// Inputs of one momentum assembly. All references stay unchanged while the system is built.
struct MomentumInputs {
  const FieldState& current;           ///< latest iterate (velocities, pressure, eps_g)
  const FieldState& old;               ///< state at the start of the time step
  const FaceCoupling* coupling = nullptr;  ///< interphase force; null when no parcels
};

/// Staggered finite-volume momentum equation for one velocity component. Rows are the
/// component's faces; only Active faces are unknowns.
/// Throws SolverError on non-finite coefficients.
EquationSystem assemble_momentum(int axis, const MomentumInputs& in, double dt, const GasProps& gas,
                                 const Mesh& mesh, double urf);

/// SIMPLE pressure-correction equation for the starred velocities in `starred`.
/// `imbalance`, when given, receives the continuity imbalance used as the right-hand side.
/// Throws SolverError on a zero diagonal in an active row.
EquationSystem assemble_pressure_correction(const FieldState& starred,
                                            const std::array<const EquationSystem*, 3>& momentum,
                                            std::span<const double> eps_g_old, double dt,
                                            const GasProps& gas, const Mesh& mesh,
                                            Field* imbalance = nullptr);

struct SolveResult {
  int iterations = 0;
  double residual = 0.0;  ///< ||b - Ax|| / ||b|| at return
  bool converged = false;
  int restarts = 0;
};

/// Unpreconditioned BiCGSTAB on the active rows, starting from sys.x. Reductions run in
/// ascending row order. On breakdown the iteration restarts once from the current iterate.
/// The best iterate is left in sys.x.
SolveResult solve_bicgstab(EquationSystem& sys, double tol, int maxit);

/// SIMPLE corrector: velocities on Active faces and pressure in FLUID cells, followed by the
/// boundary-condition pass.
void correct_fields(FieldState& state, std::span<const double> p_prime,
                    const std::array<const EquationSystem*, 3>& momentum, double urf_p,
                    const Mesh& mesh, const BoundarySpec& bc);

/// Sets the gauge pressure to the hydrostatic profile of the gas column, anchored at the
/// outlet when one exists.
void hydrostatic_pressure(FieldState& state, const Mesh& mesh, const GasProps& gas,
                          const BoundarySpec& bc);

}  // namespace mppic
