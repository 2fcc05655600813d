#pragma once

// Mixed-state semi-relativistic Hartree dynamics
//
//   i eps d/dt psi_j = sqrt(-eps^2 Lap + 1) psi_j + V psi_j,   -kappa Lap V = n,
//   n = sum_j lambda_j |psi_j|^2,
//
// advanced by Strang splitting: K(dt/2), field update, V-kick(dt), K(dt/2).
// Weights never change, so tr rho and tr rho^2 are exact invariants.

#include <filesystem>
#include <string>
#include <vector>

#include "sclim/field_solver.hpp"
#include "sclim/profile.hpp"
#include "sclim/spectral.hpp"

namespace sclim {

struct MixedState {
  double epsilon = 0.5;
  double time = 0.0;
  std::vector<double> weights;
  std::vector<ComplexField> orbitals;  // physical representation, shared grid

  MixedState() = default;
  /// Validates 0 < eps < 1, lambda_j >= 0, one orbital per weight on a common grid.
  MixedState(double eps, std::vector<double> weights, std::vector<ComplexField> orbitals,
             SpectralGrid grid);

  const SpectralGrid& grid() const noexcept { return grid_; }
  std::size_t count() const noexcept { return weights.size(); }
  double trace() const noexcept;
  double trace_squared() const noexcept;
  /// max |<psi_i, psi_j> - delta_ij|.
  double gram_deviation() const;

 private:
  SpectralGrid grid_;
};

struct HartreeParams {
  int kappa = 1;
  double dt = 1.0 / 64.0;
  double final_time = 1.0;
  Kernel kernel = Kernel::coulomb();
  /// dt <= dt_cap_factor * eps.
  double dt_cap_factor = 0.125;
  /// false freezes V at zero (free flow).
  bool coupling = true;

  void validate(double eps) const;
};

enum class Orthonormalization { spectral, lowdin };

struct InitOptions {
  Orthonormalization method = Orthonormalization::spectral;
  /// Lattice cell area per phase-space axis pair, in units of 2*pi*eps.
  double lattice_factor = 0.5;
  /// Profile support used for the lattice, in component widths.
  double support_sigmas = 6.0;
  /// Lattice sites with f0 below this fraction of max f0 are dropped.
  double site_cutoff = 1e-8;
  /// Spectral route: eigenvalues below this fraction of the largest are dropped.
  double eigen_cutoff = 1e-10;
  /// Lowdin route: smallest admissible Gram eigenvalue.
  double gram_floor = 1e-10;
  /// Largest admissible fraction of f0 mass outside the lattice cells.
  double coverage_tolerance = 1e-4;
  /// Reported bound C in sum lambda_j^2 <= C eps^d.
  double purity_bound = 10.0;
};

struct InitReport {
  std::size_t sites = 0;
  std::size_t orbitals = 0;
  double lattice_spacing = 0.0;
  double uncovered_mass_fraction = 0.0;
  double dropped_weight_fraction = 0.0;
  double min_gram_eigenvalue = 0.0;
  double scaled_purity = 0.0;  // eps^{-d} sum lambda^2
  bool purity_within_bound = true;
};

/// Coherent-state quadrature of f0 on a phase-space lattice, orthonormalized.
/// Throws ConfigError for zero mass or insufficient coverage and
/// NumericalError for a singular Gram matrix.
MixedState init_coherent_mixture(const PhaseSpaceProfile& f0, double eps, const SpectralGrid& grid,
                                 const InitOptions& options = {}, InitReport* report = nullptr);

/// (pi eps)^{-d/4} exp(-|x-xc|^2/(2 eps) + i xi_c.(x-xc)/eps), periodized by minimum image.
ComplexField coherent_state(const SpectralGrid& grid, double eps, const Vec3& x_center,
                            const Vec3& xi_center);

RealField density(const MixedState& state);

/// Multiplies every orbital by exp(-i (tau/eps) sqrt(eps^2 |xi|^2 + 1)) in Fourier space.
MixedState kinetic_step(MixedState state, double tau);
/// Pointwise multiplication by exp(-i (tau/eps) V).
MixedState potential_step(MixedState state, const RealField& potential, double tau);
/// Rejects potentials with non-negligible imaginary part.
MixedState potential_step(MixedState state, const ComplexField& potential, double tau);

MixedState strang_step(MixedState state, const HartreeParams& params, const FieldSolver& solver);

struct Checkpoint {
  MixedState state;
  int kappa = 1;
  Kernel kernel;
};

/// Writes orbital_<j>.bin/.json dumps plus checkpoint.json into dir.
void write_checkpoint(const std::filesystem::path& dir, const MixedState& state, int kappa,
                      const Kernel& kernel);
Checkpoint read_checkpoint(const std::filesystem::path& dir);

}  // namespace sclim
