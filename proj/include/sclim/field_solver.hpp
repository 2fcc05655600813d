#pragma once

// Spectral solution of -kappa*Lap V = n - mean(n) (periodic Coulomb, with a
// neutralizing background) and of (-Lap + lambda^2) V = kappa*n (Yukawa).
// The gauge is mean(V) = 0 for Coulomb; the Yukawa solve keeps the k = 0 mode.

#include <string>
#include <vector>

#include "sclim/spectral.hpp"

namespace sclim {

enum class KernelType { coulomb, yukawa };

struct Kernel {
  KernelType type = KernelType::coulomb;
  double screening = 0.0;  // lambda_Y, Yukawa only

  static Kernel coulomb() { return {}; }
  static Kernel yukawa(double lambda);
  std::string name() const;
};

struct FieldPair {
  RealField density;
  RealField potential;
  int kappa = 1;
  Kernel kernel;
};

RealField solve_poisson(const RealField& density, int kappa);
RealField solve_yukawa(const RealField& density, int kappa, double lambda);
/// Rejects fields whose imaginary part exceeds tol * max|value|.
RealField require_real(const ComplexField& field, double tol = 1e-12);

/// Spectral gradient, one component per axis; Nyquist modes are zeroed.
std::vector<RealField> grad_potential(const RealField& potential);

/// ||-kappa Lap V - (n - mean n)||_inf / ||n||_inf.
double poisson_residual(const RealField& density, const RealField& potential, int kappa);
/// ||(-Lap + lambda^2) V - kappa n||_inf / ||n||_inf.
double yukawa_residual(const RealField& density, const RealField& potential, int kappa,
                       double lambda);

/// Bound solver for a fixed grid, coupling sign and kernel; Green's symbol cached.
class FieldSolver {
 public:
  FieldSolver(SpectralGrid grid, int kappa, Kernel kernel = Kernel::coulomb());

  const SpectralGrid& grid() const noexcept { return grid_; }
  int kappa() const noexcept { return kappa_; }
  const Kernel& kernel() const noexcept { return kernel_; }

  RealField potential(const RealField& density) const;
  FieldPair solve(const RealField& density) const;
  /// Relative residual of the pair under this solver's equation.
  double residual(const RealField& density, const RealField& potential) const;
  /// Density entering the energy pairing: n - mean(n) for Coulomb, n for Yukawa.
  RealField source(const RealField& density) const;

 private:
  SpectralGrid grid_;
  int kappa_;
  Kernel kernel_;
  std::vector<double> green_;
};

}  // namespace sclim
