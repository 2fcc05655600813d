#include "sclim/field_solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sclim/errors.hpp"

namespace sclim {

namespace {

void check_kappa(int kappa) {
  if (kappa != 1 && kappa != -1) throw std::invalid_argument("kappa must be +1 or -1");
}

double k_squared(const Vec3& k) { return k[0] * k[0] + k[1] * k[1] + k[2] * k[2]; }

std::vector<double> green_symbol(const SpectralGrid& grid, int kappa, const Kernel& kernel) {
  std::vector<double> g(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double k2 = k_squared(grid.wavevector(i));
    if (kernel.type == KernelType::coulomb)
      g[i] = i == 0 ? 0.0 : kappa / k2;
    else
      g[i] = kappa / (k2 + kernel.screening * kernel.screening);
  }
  return g;
}

RealField apply_table(const RealField& f, const std::vector<double>& table) {
  ComplexField c = forward_transform(to_complex(f));
  for (std::size_t i = 0; i < c.size(); ++i) c[i] *= table[i];
  return real_part(inverse_transform(std::move(c)));
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double relative_residual(const RealField& lhs, const RealField& rhs, const RealField& density) {
  double worst = 0.0;
  for (std::size_t i = 0; i < lhs.size(); ++i) worst = std::max(worst, std::abs(lhs[i] - rhs[i]));
  const double scale = max_abs(density.values());
  return scale > 0.0 ? worst / scale : worst;
}

RealField centered(const RealField& n) {
  RealField out = n;
  double mean = 0.0;
  for (double v : n.values()) mean += v;
  mean /= static_cast<double>(n.size());
  for (auto& v : out.values()) v -= mean;
  return out;
}

}  // namespace

Kernel Kernel::yukawa(double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("Yukawa screening length must be positive");
  return {KernelType::yukawa, lambda};
}

std::string Kernel::name() const { return type == KernelType::coulomb ? "coulomb" : "yukawa"; }

RealField require_real(const ComplexField& field, double tol) {
  double imag = 0.0;
  RealField r = real_part(field, &imag);
  if (imag > tol * std::max(1.0, max_abs(r.values())))
    throw std::invalid_argument("field has a non-negligible imaginary part");
  return r;
}

RealField solve_poisson(const RealField& density, int kappa) {
  return FieldSolver(density.grid(), kappa).potential(density);
}

RealField solve_yukawa(const RealField& density, int kappa, double lambda) {
  return FieldSolver(density.grid(), kappa, Kernel::yukawa(lambda)).potential(density);
}

std::vector<RealField> grad_potential(const RealField& potential) {
  const SpectralGrid& g = potential.grid();
  const ComplexField c = forward_transform(to_complex(potential));
  std::vector<RealField> out;
  for (int a = 0; a < g.dim(); ++a) {
    ComplexField d = c;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const Index3 idx = g.unravel(i);
      d[i] *= g.is_nyquist(a, idx[a]) ? Complex(0.0) : Complex(0.0, g.wavenumber(a, idx[a]));
    }
    out.push_back(real_part(inverse_transform(std::move(d))));
  }
  return out;
}

double poisson_residual(const RealField& density, const RealField& potential, int kappa) {
  const SpectralGrid& g = potential.grid();
  std::vector<double> lap(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) lap[i] = kappa * k_squared(g.wavevector(i));
  return relative_residual(apply_table(potential, lap), centered(density), density);
}

double yukawa_residual(const RealField& density, const RealField& potential, int kappa,
                       double lambda) {
  const SpectralGrid& g = potential.grid();
  std::vector<double> op(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) op[i] = k_squared(g.wavevector(i)) + lambda * lambda;
  RealField rhs = density;
  for (auto& v : rhs.values()) v *= kappa;
  return relative_residual(apply_table(potential, op), rhs, density);
}

FieldSolver::FieldSolver(SpectralGrid grid, int kappa, Kernel kernel)
    : grid_(std::move(grid)), kappa_(kappa), kernel_(kernel) {
  check_kappa(kappa);
  if (kernel_.type == KernelType::yukawa && !(kernel_.screening > 0.0))
    throw std::invalid_argument("Yukawa screening length must be positive");
  green_ = green_symbol(grid_, kappa_, kernel_);
}

RealField FieldSolver::potential(const RealField& density) const {
  if (!(density.grid() == grid_)) throw std::invalid_argument("density lives on a different grid");
  RealField v = apply_table(density, green_);
  if (kernel_.type == KernelType::coulomb) v = centered(v);
#ifndef NDEBUG
  if (residual(density, v) > 1e-9) throw NumericalError("field solve residual check failed");
#endif
  return v;
}

FieldPair FieldSolver::solve(const RealField& density) const {
  return {density, potential(density), kappa_, kernel_};
}

double FieldSolver::residual(const RealField& density, const RealField& potential) const {
  return kernel_.type == KernelType::coulomb
             ? poisson_residual(density, potential, kappa_)
             : yukawa_residual(density, potential, kappa_, kernel_.screening);
}

RealField FieldSolver::source(const RealField& density) const {
  return kernel_.type == KernelType::coulomb ? centered(density) : density;
}

}  // namespace sclim
