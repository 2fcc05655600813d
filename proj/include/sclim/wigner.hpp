#pragma once

// eps-scaled Wigner transform
//
//   f(x, xi) = (2 pi)^{-d} sum_j lambda_j  int psi_j(x + eps y/2) conj(psi_j(x - eps y/2)) e^{-i xi.y} dy
//
// and the phase-space operators of the Wigner equation  -d_t f = Gamma f + Theta[V] f.
//
// The y integral runs over the minimum-image window |eps y_a| <= L_a/2 with the
// trapezoidal rule (half weights at both ends) on dy = dx/eps; the shifted
// orbital values are samples of the exact 2x band-limited refinement. On the
// dual xi grid (dxi = 2 pi eps/L, N_xi = N) and its power-of-two refinements
// the y sum is an FFT, and mass and marginal hold to roundoff. The L^2 scaling
// identity holds to roundoff when, in addition, the orbital spectrum lies below
// half the Nyquist wavenumber and the density-matrix kernel vanishes at
// minimum-image separation L/2. Other xi grids use a direct sum.
//
// Sign conventions (fixed by the quantum dynamics, checked by the residual test):
//   Gamma f  = F_x^{-1}[ i q.gamma(q, xi) F_x f ],             -> v(xi).grad_x f  as eps -> 0
//   Theta f  = F_xi^{-1}[ -i delta(x, eta) F_xi f ],           -> -grad V.grad_xi f as eps -> 0
// with F_xi the forward transform e^{-i eta.xi}; so <Theta f, phi> -> +<f, grad V.grad_xi phi>.

#include <array>
#include <filesystem>
#include <optional>
#include <vector>

#include "sclim/hartree.hpp"
#include "sclim/spectral.hpp"

namespace sclim {

/// Uniform cell-centred-free axis xi_i = -max + i*(2 max/count), i in [0, count).
struct XiAxis {
  int count = 0;
  double max = 0.0;
  double spacing() const noexcept { return 2.0 * max / count; }
  double value(int i) const noexcept { return -max + i * spacing(); }
  friend bool operator==(const XiAxis&, const XiAxis&) = default;
};

using XiAxes = std::array<XiAxis, kMaxDim>;

class WignerGrid {
 public:
  WignerGrid() = default;
  /// Zero samples; eps = 0 tags a classical density.
  WignerGrid(SpectralGrid x_grid, const XiAxes& xi, double eps);
  /// Natural xi axes of the transform: dxi = 2 pi eps / (P L), N_xi = P N, range pi eps N / L.
  static XiAxes dual_axes(const SpectralGrid& x_grid, double eps, int oversample = 1);

  const SpectralGrid& x_grid() const noexcept { return x_grid_; }
  const XiAxis& xi_axis(int a) const noexcept { return xi_[a]; }
  const XiAxes& xi_axes() const noexcept { return xi_; }
  int dim() const noexcept { return x_grid_.dim(); }
  double epsilon() const noexcept { return eps_; }
  void set_epsilon(double eps) noexcept { eps_ = eps; }

  std::size_t x_size() const noexcept { return x_grid_.size(); }
  std::size_t xi_size() const noexcept { return xi_size_; }
  std::size_t size() const noexcept { return values_.size(); }
  /// Row-major shape: x axes then xi axes.
  std::vector<int> shape() const;

  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }
  double& at(std::size_t ix, std::size_t ixi) noexcept { return values_[ix * xi_size_ + ixi]; }
  double at(std::size_t ix, std::size_t ixi) const noexcept { return values_[ix * xi_size_ + ixi]; }

  Vec3 xi_point(std::size_t flat) const noexcept;
  Index3 xi_unravel(std::size_t flat) const noexcept;
  double xi_cell_volume() const noexcept;
  double cell_volume() const noexcept { return x_grid_.cell_volume() * xi_cell_volume(); }
  bool same_layout(const WignerGrid& other) const noexcept;

  double integral() const noexcept;
  double l2_norm() const noexcept;

 private:
  SpectralGrid x_grid_;
  XiAxes xi_{};
  double eps_ = 0.0;
  std::size_t xi_size_ = 0;
  std::vector<double> values_;
};

struct WignerReport {
  double imaginary_residue = 0.0;   // max |Im f| / max |f|
  double boundary_fraction = 0.0;   // sum |f| on outermost xi cells / sum |f|
  bool xi_range_ok = true;          // boundary_fraction <= tolerance
};

struct WignerOptions {
  std::optional<XiAxes> xi;         // default: dual axes
  double boundary_tolerance = 1e-6;
};

WignerGrid wigner_transform(const MixedState& state, const WignerOptions& options = {},
                            WignerReport* report = nullptr);

/// n(x) = int f dxi.
RealField marginal_density(const WignerGrid& f);

/// gamma(y, xi) = 2 xi / (sqrt(|xi + eps y/2|^2 + 1) + sqrt(|xi - eps y/2|^2 + 1)).
Vec3 gamma_symbol(double eps, const Vec3& y, const Vec3& xi, int dim = kMaxDim);
/// delta(x, eta) = (V(x + eps eta/2) - V(x - eps eta/2))/eps; eps = 0 gives eta.grad V(x).
double delta_symbol(const RealField& potential, double eps, const Vec3& x, const Vec3& eta);

WignerGrid apply_gamma(const WignerGrid& f, double eps);
WignerGrid apply_theta(const WignerGrid& f, const RealField& potential, double eps);

struct TestFunction {
  Vec3 x_center{0.0, 0.0, 0.0};
  Vec3 xi_center{0.0, 0.0, 0.0};
  Vec3 x_width{1.0, 1.0, 1.0};
  Vec3 xi_width{1.0, 1.0, 1.0};

  /// exp(-|x-x0|^2/(2 sx^2) - |xi-xi0|^2/(2 sxi^2)), x by minimum image on the torus.
  double operator()(const Vec3& x, const Vec3& xi, const SpectralGrid& torus) const noexcept;
};

/// Quadrature of int int f phi; throws if phi is narrower than two cells or
/// has tails above 1e-12 at the xi boundary.
double weak_pairing(const WignerGrid& f, const TestFunction& phi);
std::vector<double> weak_pairings(const WignerGrid& f, std::span<const TestFunction> phis);

struct ResidualReport {
  std::vector<double> per_function;  // signed residuals
  double max_abs = 0.0;
};

/// -<(f_next - f_prev)/(2 dt), phi> - <Gamma f, phi> - <Theta[V] f, phi> for every phi.
ResidualReport evolution_residual(const WignerGrid& f_prev, const WignerGrid& f_now,
                                  const WignerGrid& f_next, const RealField& potential, double dt,
                                  std::span<const TestFunction> phis);

/// Dumps samples plus a manifest with x and xi axis metadata.
void write_wigner(const std::filesystem::path& stem, const WignerGrid& f);

}  // namespace sclim
