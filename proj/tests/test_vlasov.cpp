#include <doctest.h>

#include <cmath>
#include <numbers>

#include "sclim/errors.hpp"
#include "sclim/vlasov.hpp"

using namespace sclim;
using std::numbers::pi;

namespace {

XiAxes xi_axes_1d(int count, double max) {
  XiAxes a{};
  a[0] = {count, max};
  return a;
}

WignerGrid sample(const SpectralGrid& g, const XiAxes& xi, const std::function<double(double, double)>& fn) {
  WignerGrid f(g, xi, 0.0);
  for (std::size_t i = 0; i < f.x_size(); ++i)
    for (std::size_t k = 0; k < f.xi_size(); ++k) f.at(i, k) = fn(g.point(i)[0], f.xi_point(k)[0]);
  return f;
}

double periodic_gauss(double x, double c, double s, double l) {
  double r = 0.0;
  for (int m = -2; m <= 2; ++m) r += std::exp(-0.5 * std::pow((x - c + m * l) / s, 2));
  return r;
}

double max_abs_diff(const WignerGrid& a, const WignerGrid& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.values()[i] - b.values()[i]));
  return m;
}

std::pair<double, double> centre_of_mass(const WignerGrid& f) {
  double m = 0.0, x = 0.0, p = 0.0;
  for (std::size_t i = 0; i < f.x_size(); ++i)
    for (std::size_t k = 0; k < f.xi_size(); ++k) {
      m += f.at(i, k);
      x += f.at(i, k) * f.x_grid().point(i)[0];
      p += f.at(i, k) * f.xi_point(k)[0];
    }
  return {x / m, p / m};
}

PhaseSpaceProfile bump() {
  GaussianComponent c;
  c.x_center = {-0.5, 0, 0};
  c.xi_center = {0.3, 0, 0};
  c.x_width = {1.0, 1, 1};
  c.xi_width = {0.7, 1, 1};
  return PhaseSpaceProfile(1, {c});
}

}  // namespace

TEST_CASE("relativistic velocity") {
  CHECK(relativistic_velocity({1, 0, 0}, 1)[0] == doctest::Approx(1 / std::sqrt(2.0)));
  const Vec3 v = relativistic_velocity({30, 40, 0}, 2);
  CHECK(std::hypot(v[0], v[1]) < 1.0);
  CHECK(v[0] / v[1] == doctest::Approx(0.75));
}

TEST_CASE("transport_x: xi = 0 row fixed, exact free flow") {
  const double l = 4 * pi;
  const SpectralGrid g = make_grid_1d(l, 128);
  const XiAxes xi = xi_axes_1d(64, 4.0);
  auto f0 = [&](double x, double s) { return periodic_gauss(x, 0.4, 0.5, l) * std::exp(-s * s / 2); };
  const WignerGrid f = sample(g, xi, f0);
  for (double t : {0.3, 1.0, 5.0}) {
    const WignerGrid ft = transport_x(f, t);
    const std::size_t k0 = 32;  // xi = 0
    for (std::size_t i = 0; i < ft.x_size(); ++i) CHECK(std::abs(ft.at(i, k0) - f.at(i, k0)) < 1e-13);
    const WignerGrid exact = sample(g, xi, [&](double x, double s) {
      return f0(x - t * s / std::sqrt(s * s + 1), s);
    });
    CHECK(max_abs_diff(ft, exact) < 1e-8);
  }
}

TEST_CASE("kick_xi: zero force, integer-cell shifts, lost mass") {
  const SpectralGrid g = make_grid_1d(2 * pi, 16);
  const XiAxes xi = xi_axes_1d(128, 4.0);
  const double dxi = xi[0].spacing();
  const WignerGrid f = sample(g, xi, [](double x, double s) { return (1.5 + std::cos(x)) * std::exp(-2 * std::pow(s - 0.5, 2)); });
  std::vector<RealField> zero{RealField(g)};
  double lost = -1.0;
  CHECK(max_abs_diff(kick_xi(f, zero, 0.7, &lost), f) < 1e-14);
  CHECK(std::abs(lost) < 1e-14);

  // tau * g = 3 cells: the source sample sits exactly on a grid node
  const double tau = 0.5;
  std::vector<RealField> force{RealField::from_function(g, [&](const Vec3&) { return 3 * dxi / tau; })};
  const WignerGrid k = kick_xi(f, force, tau, &lost);
  double err = 0.0;
  for (std::size_t i = 0; i < f.x_size(); ++i)
    for (std::size_t m = 0; m + 3 < f.xi_size(); ++m) err = std::max(err, std::abs(k.at(i, m) - f.at(i, m + 3)));
  CHECK(err < 1e-12);
  CHECK(lost == doctest::Approx(f.integral() - k.integral()).epsilon(1e-12));
}

TEST_CASE("kick_xi: fractional constant shift of a resolved Gaussian") {
  const SpectralGrid g = make_grid_1d(2 * pi, 8);
  const XiAxes xi = xi_axes_1d(256, 4.0);
  auto h = [](double s) { return std::exp(-std::pow(s + 0.2, 2) / (2 * 0.3 * 0.3)); };
  const WignerGrid f = sample(g, xi, [&](double, double s) { return h(s); });
  const double tau = 0.1, gval = 2.37;
  std::vector<RealField> force{RealField::from_function(g, [&](const Vec3&) { return gval; })};
  const WignerGrid k = kick_xi(f, force, tau);
  const WignerGrid exact = sample(g, xi, [&](double, double s) { return h(s + tau * gval); });
  CHECK(max_abs_diff(k, exact) < 1e-4);
}

TEST_CASE("frozen field: blob centre follows the characteristic flow") {
  // V = -cos x, grad V = sin x. Oracle: the flow map averaged over the
  // initial Gaussian by Gauss-Hermite quadrature, each characteristic by RK4.
  const double l = 2 * pi;
  const SpectralGrid g = make_grid_1d(l, 256);
  const XiAxes xi = xi_axes_1d(256, 2.0);
  const double x0 = 0.5, p0 = 0.2, sx = 0.1, sp = 0.05;
  const WignerGrid f0 = sample(g, xi, [&](double x, double s) {
    return periodic_gauss(x, x0, sx, l) * std::exp(-0.5 * std::pow((s - p0) / sp, 2));
  });
  const RealField gv = RealField::from_function(g, [](const Vec3& x) { return std::sin(x[0]); });
  const std::vector<RealField> grad{gv};
  const double dt = 1.0 / 128, t_end = 1.0;
  WignerGrid f = f0;
  for (int n = 0; n < 128; ++n) {
    f = transport_x(f, dt / 2);
    f = kick_xi(f, grad, dt);
    f = transport_x(f, dt / 2);
  }
  const auto [mx, mp] = centre_of_mass(f);

  const double nodes[5] = {-2.0201828704560856, -0.9585724646138185, 0.0, 0.9585724646138185, 2.0201828704560856};
  const double weights[5] = {0.019953242059045913, 0.39361932315224116, 0.9453087204829419, 0.39361932315224116,
                             0.019953242059045913};
  auto rhs = [](double x, double p) { return std::pair{p / std::sqrt(p * p + 1), -std::sin(x)}; };
  double ox = 0.0, op = 0.0, wsum = 0.0;
  for (int a = 0; a < 5; ++a)
    for (int b = 0; b < 5; ++b) {
      double x = x0 + std::sqrt(2.0) * sx * nodes[a], p = p0 + std::sqrt(2.0) * sp * nodes[b];
      const int steps = 4000;
      const double h = t_end / steps;
      for (int s = 0; s < steps; ++s) {
        const auto k1 = rhs(x, p);
        const auto k2 = rhs(x + h / 2 * k1.first, p + h / 2 * k1.second);
        const auto k3 = rhs(x + h / 2 * k2.first, p + h / 2 * k2.second);
        const auto k4 = rhs(x + h * k3.first, p + h * k3.second);
        x += h / 6 * (k1.first + 2 * k2.first + 2 * k3.first + k4.first);
        p += h / 6 * (k1.second + 2 * k2.second + 2 * k3.second + k4.second);
      }
      const double w = weights[a] * weights[b];
      ox += w * x;
      op += w * p;
      wsum += w;
    }
  CHECK(std::abs(mx - ox / wsum) < 1e-3);
  CHECK(std::abs(mp - op / wsum) < 1e-3);
}

TEST_CASE("strang step: zero data, uncoupled flow, coupled invariants") {
  const SpectralGrid g = make_grid_1d(4 * pi, 64);
  const XiAxes xi = xi_axes_1d(128, 6.0);
  const FieldSolver solver(g, 1);
  VlasovParams p;
  p.dt = 1.0 / 32;

  VlasovState zero{WignerGrid(g, xi, 0.0), RealField(g), 1, 0.0, 0.0, 0.0};
  const VlasovState z1 = vlasov_strang_step(zero, p, solver, 1.0);
  CHECK(max_abs_diff(z1.f, zero.f) == 0.0);
  CHECK(z1.time == p.dt);

  p.coupling = false;
  const VlasovState s0 = make_vlasov_state(bump(), g, xi, solver, false);
  const VlasovState s1 = vlasov_strang_step(s0, p, solver, s0.f.integral());
  // two half-step shifts against one full step: roundoff only
  CHECK(max_abs_diff(s1.f, transport_x(s0.f, p.dt)) < 1e-11 * max_abs_diff(s0.f, WignerGrid(g, xi, 0.0)));

  p.coupling = true;
  VlasovState s = make_vlasov_state(bump(), g, xi, solver, true);
  const VlasovEnergies e0 = vlasov_energies(s, solver);
  double prev_l2 = e0.l2;
  for (int n = 0; n < 32; ++n) {
    s = vlasov_strang_step(std::move(s), p, solver, e0.mass);
    const double l2 = s.f.l2_norm();
    CHECK(l2 <= prev_l2 * (1 + 1e-14));
    prev_l2 = l2;
  }
  const VlasovEnergies e1 = vlasov_energies(s, solver);
  CHECK(std::abs(e1.mass - e0.mass) / e0.mass < 1e-6);
  CHECK(std::abs(e1.total() - e0.total()) / std::abs(e0.total()) < 1e-3);
  CHECK(std::abs(e1.l2 - e0.l2) / e0.l2 < 1e-3);
  CHECK(s.time == doctest::Approx(1.0));
}

TEST_CASE("boundary loss escalates to a numerical error") {
  const SpectralGrid g = make_grid_1d(2 * pi, 16);
  XiAxes xi = xi_axes_1d(32, 1.0);
  GaussianComponent c;
  c.xi_center = {0.8, 0, 0};
  c.xi_width = {0.3, 1, 1};
  c.x_width = {0.8, 1, 1};
  const FieldSolver solver(g, -1);
  VlasovState s = make_vlasov_state(PhaseSpaceProfile(1, {c}), g, xi, solver, true);
  VlasovParams p;
  p.dt = 0.25;
  CHECK_THROWS_AS(
      [&] {
        for (int n = 0; n < 40; ++n) s = vlasov_strang_step(std::move(s), p, solver, 1.0);
      }(),
      NumericalError);
}

TEST_CASE("energies: closed-form potential energy") {
  // f = (1 + a cos x) h(xi) with int h = 1 on [-pi, pi): V = a cos x, E_pot = a^2 pi / 2
  const SpectralGrid g = make_grid_1d(2 * pi, 32);
  const XiAxes xi = xi_axes_1d(128, 8.0);
  const double a = 0.4;
  const double norm = 1.0 / std::sqrt(2 * pi);
  const WignerGrid f = sample(g, xi, [&](double x, double s) { return (1 + a * std::cos(x)) * norm * std::exp(-s * s / 2); });
  const FieldSolver solver(g, 1);
  VlasovState s{f, RealField(g), 1, 0.0, 0.0, 0.0};
  const VlasovEnergies e = vlasov_energies(s, solver);
  CHECK(e.mass == doctest::Approx(2 * pi).epsilon(1e-10));
  CHECK(e.potential == doctest::Approx(a * a * pi / 2).epsilon(1e-10));
  CHECK(e.kinetic > e.mass);
  CHECK(vlasov_energies(s, FieldSolver(g, -1)).potential == doctest::Approx(-a * a * pi / 2).epsilon(1e-10));
  CHECK(vlasov_energies(s, solver, false).potential == 0.0);
}
