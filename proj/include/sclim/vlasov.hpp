#pragma once

// Relativistic Vlasov-Poisson
//
//   d_t f + v(xi).grad_x f - grad V.grad_xi f = 0,   v(xi) = xi/sqrt(|xi|^2 + 1),   -kappa Lap V = n,
//
// by Strang splitting: x-transport(dt/2), field solve, xi-kick(dt), x-transport(dt/2).
// x-transport is an exact spectral shift per xi row. The kick shifts every xi
// column by a constant using cubic B-splines with zero extension outside the
// truncated xi box; mass advected in from outside is zero and the loss is tracked.

#include <vector>

#include "sclim/field_solver.hpp"
#include "sclim/profile.hpp"
#include "sclim/wigner.hpp"

namespace sclim {

struct VlasovState {
  WignerGrid f;        // eps tag 0
  RealField potential;
  int kappa = 1;
  double time = 0.0;
  double lost_mass = 0.0;        // cumulative mass lost through the xi boundary
  double max_kick_cells = 0.0;   // largest per-step xi displacement in cells
};

/// Samples f0 on the phase-space grid (eps tag 0) and solves for V.
VlasovState make_vlasov_state(const PhaseSpaceProfile& f0, const SpectralGrid& x_grid,
                              const XiAxes& xi, const FieldSolver& solver, bool coupling = true);

/// v(xi) = xi/sqrt(|xi|^2 + 1).
Vec3 relativistic_velocity(const Vec3& xi, int dim);

/// f(x, xi) <- f(x - tau v(xi), xi).
WignerGrid transport_x(const WignerGrid& f, double tau);

/// f(x, xi) <- f(x, xi + tau grad V(x)); *lost_mass receives the mass removed at the xi boundary.
WignerGrid kick_xi(const WignerGrid& f, const std::vector<RealField>& grad_v, double tau,
                   double* lost_mass = nullptr);

struct VlasovParams {
  double dt = 1.0 / 64.0;
  bool coupling = true;
  /// Cumulative boundary loss, relative to the initial mass, that aborts a run.
  double max_boundary_loss = 1e-4;
};

/// Throws NumericalError when cumulative boundary loss exceeds the limit (relative to initial_mass).
VlasovState vlasov_strang_step(VlasovState state, const VlasovParams& params, const FieldSolver& solver,
                               double initial_mass);

struct VlasovEnergies {
  double mass = 0.0;
  double l2 = 0.0;
  double kinetic = 0.0;     // int int sqrt(|xi|^2 + 1) f
  double potential = 0.0;   // 1/2 int V (n - mean n) (Coulomb) or 1/2 int V n (Yukawa)
  double total() const noexcept { return kinetic + potential; }
  double min_over_max = 0.0;  // undershoot diagnostic, min f / max f
};

/// The potential term uses V solved from the current marginal; zero when coupling is off.
VlasovEnergies vlasov_energies(const VlasovState& state, const FieldSolver& solver, bool coupling = true);

}  // namespace sclim
