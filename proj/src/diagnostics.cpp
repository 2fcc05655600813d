#include "sclim/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "sclim/errors.hpp"
#include "sclim/field_io.hpp"

namespace sclim {

namespace {

constexpr double kPi = std::numbers::pi;

// sum_j lambda_j sum_k m(xi_k) |psi_hat_j(k)|^2 (2 pi / L)^d
double spectral_expectation(const MixedState& state, const std::function<double(const Vec3&)>& symbol) {
  const SpectralGrid& g = state.grid();
  std::vector<double> table(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) table[i] = symbol(g.wavevector(i));
  double total = 0.0;
  for (std::size_t j = 0; j < state.count(); ++j) {
    const ComplexField c = forward_transform(state.orbitals[j]);
    double s = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) s += table[i] * std::norm(c[i]);
    total += state.weights[j] * s;
  }
  return total * g.mode_volume();
}

double norm3(const Vec3& k) { return std::sqrt(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]); }

}  // namespace

double kinetic_energy(const MixedState& state) {
  const double eps = state.epsilon;
  return spectral_expectation(state, [eps](const Vec3& k) {
    const double r = eps * norm3(k);
    return std::sqrt(r * r + 1.0);
  });
}

double trace_abs_gradient(const MixedState& state) {
  return spectral_expectation(state, [](const Vec3& k) { return norm3(k); });
}

double potential_energy(const RealField& n, const RealField& v, const FieldSolver& solver) {
  if (solver.residual(n, v) > 1e-9)
    throw std::invalid_argument("potential is inconsistent with the density (residual check failed)");
  const RealField src = solver.source(n);
  double s = 0.0;
  for (std::size_t i = 0; i < src.size(); ++i) s += v[i] * src[i];
  return 0.5 * s * n.grid().cell_volume();
}

double potential_energy_fourier(const RealField& n, const RealField& v, const FieldSolver& solver) {
  const ComplexField a = forward_transform(to_complex(solver.source(n)));
  const ComplexField b = forward_transform(to_complex(v));
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (std::conj(b[i]) * a[i]).real();
  return 0.5 * s * n.grid().mode_volume();
}

double potential_energy(const MixedState& state, const FieldSolver& solver) {
  const RealField n = density(state);
  return potential_energy(n, solver.potential(n), solver);
}

Eigen::MatrixXcd density_matrix_kernel(const MixedState& state) {
  const std::size_t n = state.grid().size();
  Eigen::MatrixXcd psi(n, state.count());
  Eigen::VectorXd lam(state.count());
  for (std::size_t j = 0; j < state.count(); ++j) {
    lam(j) = state.weights[j];
    for (std::size_t i = 0; i < n; ++i) psi(i, j) = state.orbitals[j][i];
  }
  return psi * lam.asDiagonal() * psi.adjoint();
}

double schatten_norm(const Eigen::MatrixXcd& kernel, double cell_volume, double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("Schatten exponent must be >= 1");
  if (kernel.rows() != kernel.cols()) throw std::invalid_argument("kernel must be square");
  const double scale = kernel.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  const double asym = (kernel - kernel.adjoint()).cwiseAbs().maxCoeff() / scale;
  if (asym > 1e-8) throw std::invalid_argument("kernel is not Hermitian (asymmetry above 1e-8)");
  const Eigen::MatrixXcd h = 0.5 * (kernel + kernel.adjoint()) * cell_volume;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(h, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) throw NumericalError("kernel eigendecomposition failed");
  double s = 0.0;
  for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i) s += std::pow(std::abs(eig.eigenvalues()(i)), p);
  return std::pow(s, 1.0 / p);
}

LiebThirringExponents lieb_thirring_exponents(double p, int d) {
  if (!(p > 1.0)) throw std::invalid_argument("Lieb-Thirring exponent needs p > 1");
  if (d < 1) throw std::invalid_argument("dimension must be positive");
  const double a = d * (p - 1.0);
  return {(a + p) / (a + 1.0), p / (a + p)};
}

double lp_norm(const RealField& field, double p) {
  double s = 0.0;
  for (double v : field.values()) s += std::pow(std::abs(v), p);
  return std::pow(s * field.grid().cell_volume(), 1.0 / p);
}

double lieb_thirring_ratio(const MixedState& state, double p) {
  if (state.grid().size() > 512) throw std::invalid_argument("dense Schatten norm limited to 512 grid points");
  const auto [q, theta] = lieb_thirring_exponents(p, state.grid().dim());
  const double sp = schatten_norm(density_matrix_kernel(state), state.grid().cell_volume(), p);
  const double tg = trace_abs_gradient(state);
  if (!(sp > 0.0) || !(tg > 0.0)) throw std::invalid_argument("Lieb-Thirring ratio undefined for a zero state");
  return lp_norm(density(state), q) / (std::pow(sp, theta) * std::pow(tg, 1.0 - theta));
}

double dilation_covariance_check(const MixedState& state, double p, double scale) {
  if (!(scale > 0.0)) throw std::invalid_argument("dilation scale must be positive");
  const double base = lieb_thirring_ratio(state, p);
  if (scale == 1.0) return 0.0;
  const SpectralGrid& g = state.grid();
  const int d = g.dim();
  int refine = 1;
  while (refine < scale) refine *= 2;
  std::array<double, kMaxDim> lengths{};
  std::array<int, kMaxDim> counts{};
  for (int a = 0; a < d; ++a) {
    lengths[a] = g.length(a);
    counts[a] = g.count(a) * refine;
  }
  const SpectralGrid fine(d, std::span(lengths.data(), d), std::span(counts.data(), d));

  // The dilated orbital only sees psi on |x_a| <= min(scale, 1) L_a/2; that region must hold all the mass.
  const double keep = std::min(scale, 1.0);
  std::vector<ComplexField> orbitals;
  for (const auto& o : state.orbitals) {
    double outside = 0.0, total = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const Vec3 x = g.point(i);
      const double w = std::norm(o[i]);
      total += w;
      for (int a = 0; a < d; ++a)
        if (std::abs(x[a]) >= keep * 0.5 * g.length(a) * (1.0 - 1e-12)) {
          outside += w;
          break;
        }
    }
    if (total > 0.0 && outside > 1e-10 * total)
      throw std::invalid_argument("dilation pushes the orbital support outside the grid");
    std::vector<Vec3> pts(fine.size());
    std::vector<bool> inside(fine.size(), true);
    for (std::size_t i = 0; i < fine.size(); ++i) {
      const Vec3 x = fine.point(i);
      for (int a = 0; a < d; ++a) {
        pts[i][a] = scale * x[a];
        if (std::abs(pts[i][a]) > 0.5 * g.length(a)) inside[i] = false;
      }
    }
    const auto vals = trig_interpolate(o, pts);
    const double amp = std::pow(scale, 0.5 * d);
    std::vector<Complex> v(fine.size());
    for (std::size_t i = 0; i < fine.size(); ++i) v[i] = inside[i] ? amp * vals[i] : Complex(0.0);
    orbitals.emplace_back(fine, std::move(v));
  }
  const MixedState dilated(state.epsilon, state.weights, std::move(orbitals), fine);
  return std::abs(lieb_thirring_ratio(dilated, p) - base) / base;
}

InequalityCheck holder_check(const RealField& n) {
  InequalityCheck c;
  c.lhs = lp_norm(n, 6.0 / 5.0);
  c.rhs = std::pow(lp_norm(n, 1.0), 1.0 / 6.0) * std::pow(lp_norm(n, 5.0 / 4.0), 5.0 / 6.0);
  c.holds = c.lhs <= c.rhs * (1.0 + 1e-12);
  return c;
}

InequalityCheck sobolev_check(const RealField& n, double c_s) {
  if (n.grid().dim() != 3) throw std::invalid_argument("Sobolev check is defined on 3D grids");
  const RealField v = solve_poisson(n, 1);
  const FieldSolver solver(n.grid(), 1);
  InequalityCheck c;
  c.lhs = 4.0 * kPi * 2.0 * potential_energy(n, v, solver);
  const double l65 = lp_norm(n, 6.0 / 5.0);
  c.rhs = c_s * l65 * l65;
  c.holds = c.lhs <= c.rhs;
  return c;
}

AssumptionReport assumption_margins(const MixedState& state, int kappa,
                                    const std::optional<AssumptionConstants>& constants) {
  const int d = state.grid().dim();
  AssumptionReport r;
  r.trace = state.trace();
  r.scaled_purity = state.trace_squared() / std::pow(state.epsilon, d);
  r.kinetic_energy = kinetic_energy(state);
  r.wigner_l2 = std::sqrt(state.trace_squared() / std::pow(2.0 * kPi * state.epsilon, d));
  r.zero_mass = r.trace == 0.0;
  r.blocking = d == 3 && kappa == -1;
  if (r.blocking && !constants)
    throw ConfigError("attractive coupling in d = 3 needs the constants C_s and C_2");
  if (constants) {
    if (!(constants->c_s > 0.0) || !(constants->c_2 > 0.0))
      throw ConfigError("constants C_s and C_2 must be positive");
    r.c_tilde = constants->c_s * std::pow(constants->c_2, 5.0 / 3.0) * std::cbrt(r.trace) *
                std::pow(r.wigner_l2, 2.0 / 3.0);
    r.margin = 8.0 * kPi - *r.c_tilde;
    r.c_star = std::pow(8.0 * kPi, 3) / (std::pow(constants->c_s, 3) * std::pow(constants->c_2, 5));
  }
  if (r.zero_mass)
    r.note = "zero mass";
  else if (!r.blocking)
    r.note = "margin informational (enforced only for kappa = -1, d = 3)";
  r.passed = !r.blocking || (r.margin && *r.margin > 0.0);
  return r;
}

double grad_potential_l2(const RealField& v) {
  double s = 0.0;
  for (const auto& c : grad_potential(v))
    for (double x : c.values()) s += x * x;
  return std::sqrt(s * v.grid().cell_volume());
}

std::string DiagnosticsRecord::csv_header() {
  return "t,trace,trace_sq,scaled_trace_sq,e_kin,e_pot,e_total,wigner_l2,grad_v_l2,n_l1,n_l5_4,n_l6_5,"
         "holder_ok,margin";
}

std::string DiagnosticsRecord::csv_row() const {
  std::ostringstream os;
  for (double v : {t, trace, trace_sq, scaled_trace_sq, e_kin, e_pot, e_total, wigner_l2, grad_v_l2, n_l1,
                   n_l54, n_l65})
    os << io::format_double(v) << ',';
  os << (holder_ok ? 1 : 0) << ',' << io::format_double(margin);
  return os.str();
}

DiagnosticsRecord make_record(const MixedState& state, const FieldSolver& solver, bool coupling,
                              const std::optional<AssumptionConstants>& constants, double wigner_l2) {
  DiagnosticsRecord r;
  const int d = state.grid().dim();
  r.t = state.time;
  r.trace = state.trace();
  r.trace_sq = state.trace_squared();
  r.scaled_trace_sq = r.trace_sq / std::pow(state.epsilon, d);
  r.e_kin = kinetic_energy(state);
  const RealField n = density(state);
  if (coupling) {
    const RealField v = solver.potential(n);
    r.e_pot = potential_energy(n, v, solver);
    r.grad_v_l2 = grad_potential_l2(v);
  }
  r.e_total = r.e_kin + r.e_pot;
  r.wigner_l2 = wigner_l2 >= 0.0 ? wigner_l2 : std::sqrt(r.trace_sq / std::pow(2.0 * kPi * state.epsilon, d));
  r.n_l1 = lp_norm(n, 1.0);
  r.n_l54 = lp_norm(n, 5.0 / 4.0);
  r.n_l65 = lp_norm(n, 6.0 / 5.0);
  r.holder_ok = holder_check(n).holds;
  r.margin = std::numeric_limits<double>::quiet_NaN();
  if (constants) {
    const auto m = assumption_margins(state, solver.kappa(), constants);
    if (m.margin) r.margin = *m.margin;
  }
  return r;
}

}  // namespace sclim
