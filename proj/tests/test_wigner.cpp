#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "random_states.hpp"
#include "sclim/wigner.hpp"

using namespace sclim;
using std::numbers::pi;

namespace {

constexpr double kL = 4 * pi;

double velocity(double xi) { return xi / std::sqrt(xi * xi + 1.0); }

MixedState gaussian_pure_state(const SpectralGrid& g, double eps, double sigma) {
  const ComplexField psi = ComplexField::from_function(g, [&](const Vec3& x) {
    return Complex(std::pow(pi * sigma * sigma, -0.25) * std::exp(-x[0] * x[0] / (2 * sigma * sigma)));
  });
  return MixedState(eps, {1.0}, {psi}, g);
}

// Random orthonormal orbitals with spectrum inside |k| < N/4.
MixedState random_state(const SpectralGrid& g, double eps, int count, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ud(0.0, 1.0);
  std::vector<ComplexField> orbs;
  std::vector<double> w;
  for (int j = 0; j < count; ++j) {
    ComplexField c(g, Representation::fourier);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const Index3 idx = g.unravel(i);
      bool low = true;
      for (int a = 0; a < g.dim(); ++a) low = low && std::abs(g.mode_index(a, idx[a])) < g.count(a) / 8;
      if (low) c[i] = Complex(nd(rng), nd(rng));
    }
    ComplexField o = inverse_transform(std::move(c));
    for (const auto& prev : orbs) {
      const Complex p = inner_product(prev, o);
      for (std::size_t i = 0; i < o.size(); ++i) o[i] -= p * prev[i];
    }
    const double nrm = l2_norm(o);
    for (auto& z : o.values()) z /= nrm;
    orbs.push_back(std::move(o));
    w.push_back(ud(rng));
  }
  return MixedState(eps, std::move(w), std::move(orbs), g);
}

WignerGrid separable(const SpectralGrid& g, const XiAxes& xi, double eps,
                     const std::function<double(double)>& gx, const std::function<double(double)>& hxi) {
  WignerGrid f(g, xi, eps);
  for (std::size_t ix = 0; ix < f.x_size(); ++ix)
    for (std::size_t k = 0; k < f.xi_size(); ++k) f.at(ix, k) = gx(g.point(ix)[0]) * hxi(f.xi_point(k)[0]);
  return f;
}

double max_abs(const WignerGrid& f) {
  double m = 0.0;
  for (double v : f.values()) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

TEST_CASE("dual axes") {
  const SpectralGrid g = make_grid_1d(kL, 128);
  const XiAxes ax = WignerGrid::dual_axes(g, 0.25);
  CHECK(ax[0].count == 128);
  CHECK(ax[0].spacing() == doctest::Approx(2 * pi * 0.25 / kL));
  CHECK(ax[0].max == doctest::Approx(pi * 0.25 * 128 / kL));
  const XiAxes fine = WignerGrid::dual_axes(g, 0.25, 2);
  CHECK(fine[0].count == 256);
  CHECK(fine[0].max == ax[0].max);
  CHECK_THROWS_AS(WignerGrid::dual_axes(g, 0.25, 3), std::invalid_argument);
}

TEST_CASE("Gaussian pure state: closed-form Wigner function and marginal") {
  const SpectralGrid g = make_grid_1d(kL, 128);
  const double sigma = 0.5;
  for (double eps : {0.25, 0.1}) {
    const MixedState s = gaussian_pure_state(g, eps, sigma);
    auto oracle = [&](double x, double xi) {
      return std::exp(-x * x / (sigma * sigma) - sigma * sigma * xi * xi / (eps * eps)) / (pi * eps);
    };
    XiAxes other{};
    other[0] = {96, 3.0};
    for (const auto& opt : {WignerOptions{}, WignerOptions{WignerGrid::dual_axes(g, eps, 4)}, WignerOptions{other}}) {
      WignerReport rep;
      const WignerGrid f = wigner_transform(s, opt, &rep);
      double err = 0.0;
      for (std::size_t ix = 0; ix < f.x_size(); ++ix)
        for (std::size_t k = 0; k < f.xi_size(); ++k)
          err = std::max(err, std::abs(f.at(ix, k) - oracle(g.position(0, static_cast<int>(ix)), f.xi_point(k)[0])));
      CHECK(err < 1e-6);
      CHECK(rep.imaginary_residue < 1e-10);
      CHECK(rep.xi_range_ok);
      const RealField n = marginal_density(f);
      double nerr = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) {
        const double x = g.position(0, static_cast<int>(i));
        nerr = std::max(nerr, std::abs(n[i] - std::exp(-x * x / (sigma * sigma)) / std::sqrt(pi * sigma * sigma)));
      }
      CHECK(nerr < 1e-6);
    }
  }
}

TEST_CASE("narrow xi range is reported") {
  const SpectralGrid g = make_grid_1d(kL, 128);
  XiAxes narrow{};
  narrow[0] = {32, 0.3};
  WignerOptions opt;
  opt.xi = narrow;
  WignerReport rep;
  (void)wigner_transform(gaussian_pure_state(g, 0.25, 0.5), opt, &rep);
  CHECK_FALSE(rep.xi_range_ok);
  CHECK(rep.boundary_fraction > 1e-6);
}

TEST_CASE("zero state gives zero Wigner function") {
  const SpectralGrid g = make_grid_1d(kL, 64);
  MixedState s = gaussian_pure_state(g, 0.25, 0.5);
  s.weights[0] = 0.0;
  const WignerGrid f = wigner_transform(s);
  CHECK(max_abs(f) == 0.0);
  CHECK(max_abs(apply_gamma(f, 0.25)) == 0.0);
}

TEST_CASE("random mixed states: reality, mass, marginal and L2 scaling") {
  std::mt19937_64 rng(42);
  const double l[2] = {kL, kL};
  const int n1[1] = {64};
  const int n2[2] = {32, 32};
  for (int d : {1, 2}) {
    const SpectralGrid g = d == 1 ? make_grid(1, l, n1) : make_grid(2, l, n2);
    for (double eps : {0.5, 0.25}) {
      const MixedState s = random_state(g, eps, 5, rng);
      WignerReport rep;
      const WignerGrid f = wigner_transform(s, {}, &rep);
      CHECK(rep.imaginary_residue < 1e-10);
      CHECK(std::abs(f.integral() - s.trace()) < 1e-8);
      const RealField n = marginal_density(f);
      const RealField ref = density(s);
      double gap = 0.0, scale = 0.0;
      for (std::size_t i = 0; i < n.size(); ++i) {
        gap = std::max(gap, std::abs(n[i] - ref[i]));
        scale = std::max(scale, std::abs(ref[i]));
      }
      CHECK(gap / scale < 1e-6);
    }
  }
}

TEST_CASE("L2 scaling identity for random localized mixtures") {
  std::mt19937_64 rng(17);
  const SpectralGrid g1 = make_grid_1d(kL, 512);
  const double l[2] = {kL, kL};
  const int n[2] = {64, 64};
  const SpectralGrid g2 = make_grid(2, l, n);
  const testing::PacketRanges wide{0.2, 0.8, 0.9, 0.5};
  for (int d : {1, 2}) {
    const SpectralGrid& g = d == 1 ? g1 : g2;
    for (double eps : d == 1 ? std::vector<double>{0.5, 0.25, 0.125} : std::vector<double>{0.5}) {
      const MixedState s = d == 1 ? testing::random_packet_state(g, eps, 4, rng)
                                  : testing::random_packet_state(g, eps, 3, rng, wide);
      const double target = s.trace_squared() / std::pow(2 * pi * eps, d);
      for (int over : {1, 2}) {
        const WignerGrid f = wigner_transform(s, {WignerGrid::dual_axes(g, eps, over)});
        const double l2sq = f.l2_norm() * f.l2_norm();
        INFO("d = " << d << ", eps = " << eps << ", oversampling = " << over);
        CHECK(std::abs(l2sq - target) / target < 1e-8);
        CHECK(std::abs(f.integral() - s.trace()) < 1e-10);
      }
    }
  }
}

TEST_CASE("gamma symbol") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd(0.0, 5.0);
  const Vec3 y0{0, 0, 0};
  const Vec3 xi{0.3, -1.2, 2.0};
  const Vec3 g0 = gamma_symbol(0.5, y0, xi);
  const double r = std::sqrt(0.09 + 1.44 + 4.0 + 1.0);
  for (int a = 0; a < 3; ++a) CHECK(g0[a] == doctest::Approx(xi[a] / r));
  CHECK(gamma_symbol(1.0, {2, 0, 0}, {1, 0, 0}, 1)[0] == doctest::Approx(2.0 / (std::sqrt(5.0) + 1.0)));
  CHECK(gamma_symbol(1.0, {2, 0, 0}, {1, 0, 0}, 1)[0] == doctest::Approx(0.61803).epsilon(1e-5));
  for (int t = 0; t < 2000; ++t) {
    const Vec3 y{nd(rng), nd(rng), nd(rng)};
    const Vec3 x{nd(rng), nd(rng), nd(rng)};
    const double eps = std::abs(nd(rng)) / 5.0;
    const Vec3 a = gamma_symbol(eps, y, x);
    const Vec3 b = gamma_symbol(eps, {-y[0], -y[1], -y[2]}, x);
    CHECK(a[0] * a[0] + a[1] * a[1] + a[2] * a[2] <= 1.0 + 1e-15);
    for (int k = 0; k < 3; ++k) CHECK(a[k] == b[k]);
  }
}

TEST_CASE("apply_gamma: x-independent data, limit form, small-eps gap") {
  const SpectralGrid g = make_grid_1d(2 * pi, 64);
  XiAxes xi{};
  xi[0] = {64, 6.0};
  auto h = [](double s) { return std::exp(-s * s / 2); };
  const WignerGrid flat = separable(g, xi, 0.3, [](double) { return 2.0; }, h);
  CHECK(max_abs(apply_gamma(flat, 0.3)) < 1e-12);

  auto gx = [](double x) { return std::sin(x) + 0.3 * std::cos(3 * x); };
  auto dgx = [](double x) { return std::cos(x) - 0.9 * std::sin(3 * x); };
  const WignerGrid f = separable(g, xi, 0.0, gx, h);
  const WignerGrid lim = apply_gamma(f, 0.0);
  double err = 0.0;
  for (std::size_t ix = 0; ix < f.x_size(); ++ix)
    for (std::size_t k = 0; k < f.xi_size(); ++k) {
      const double s = f.xi_point(k)[0];
      err = std::max(err, std::abs(lim.at(ix, k) - velocity(s) * dgx(g.position(0, static_cast<int>(ix))) * h(s)));
    }
  CHECK(err < 1e-12);

  // random smooth data: eps = 1e-3 against the limit operator
  std::mt19937_64 rng(8);
  std::normal_distribution<double> nd;
  std::vector<double> a(6), b(6);
  for (int m = 0; m < 6; ++m) a[m] = nd(rng), b[m] = nd(rng);
  WignerGrid r(g, xi, 1e-3);
  for (std::size_t ix = 0; ix < r.x_size(); ++ix)
    for (std::size_t k = 0; k < r.xi_size(); ++k) {
      const double x = g.position(0, static_cast<int>(ix)), s = r.xi_point(k)[0];
      double v = 0.0;
      for (int m = 0; m < 6; ++m) v += std::cos((m + 1) * x + a[m]) * std::exp(-std::pow(s - 0.3 * b[m], 2));
      r.at(ix, k) = v;
    }
  const WignerGrid small = apply_gamma(r, 1e-3);
  const WignerGrid limit = apply_gamma(r, 0.0);
  double gap = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    gap = std::max(gap, std::abs(small.values()[i] - limit.values()[i]));
    scale = std::max(scale, std::abs(limit.values()[i]));
  }
  CHECK(gap / scale < 1e-2);
}

TEST_CASE("delta symbol") {
  const SpectralGrid g = make_grid_1d(kL, 64);
  const RealField flat = RealField::from_function(g, [](const Vec3&) { return 1.5; });
  CHECK(std::abs(delta_symbol(flat, 0.3, {0.2, 0, 0}, {1.7, 0, 0})) < 1e-13);

  const RealField v = RealField::from_function(g, [](const Vec3& x) { return std::sin(2 * pi * x[0] / kL); });
  for (double eps : {0.5, 0.1}) {
    const double x = 0.7, eta = -2.3;
    const double ref = (std::sin(2 * pi * (x + eps * eta / 2) / kL) - std::sin(2 * pi * (x - eps * eta / 2) / kL)) / eps;
    CHECK(delta_symbol(v, eps, {x, 0, 0}, {eta, 0, 0}) == doctest::Approx(ref).epsilon(1e-12));
    CHECK(delta_symbol(v, eps, {x, 0, 0}, {-eta, 0, 0}) == doctest::Approx(-ref).epsilon(1e-12));
  }

  // random band-limited V: Taylor remainder of the centred difference
  std::mt19937_64 rng(4);
  std::normal_distribution<double> nd;
  std::vector<double> c(5), ph(5);
  for (int m = 0; m < 5; ++m) c[m] = nd(rng), ph[m] = nd(rng);
  auto k = [](int m) { return 2 * pi * (m + 1) / kL; };
  const RealField r = RealField::from_function(g, [&](const Vec3& x) {
    double s = 0.0;
    for (int m = 0; m < 5; ++m) s += c[m] * std::cos(k(m) * x[0] + ph[m]);
    return s;
  });
  double v2 = 0.0;
  for (int m = 0; m < 5; ++m) v2 += std::abs(c[m]) * k(m) * k(m);
  const double eps = 1e-4;
  for (double x : {-3.0, 0.1, 2.5})
    for (double eta : {-1.0, 0.5, 2.0}) {
      double dv = 0.0;
      for (int m = 0; m < 5; ++m) dv -= c[m] * k(m) * std::sin(k(m) * x + ph[m]);
      CHECK(std::abs(delta_symbol(r, eps, {x, 0, 0}, {eta, 0, 0}) - eta * dv) <= 1e-4 * v2);
      CHECK(delta_symbol(r, 0.0, {x, 0, 0}, {eta, 0, 0}) == doctest::Approx(eta * dv).epsilon(1e-10));
    }
}

TEST_CASE("apply_theta: constant potential, limit form, small-eps gap") {
  const SpectralGrid g = make_grid_1d(2 * pi, 64);
  XiAxes xi{};
  xi[0] = {128, 10.0};
  auto h = [](double s) { return std::exp(-s * s / 2); };
  auto gx = [](double x) { return 1.0 + 0.5 * std::cos(x); };
  const WignerGrid f = separable(g, xi, 0.0, gx, h);
  const RealField flat = RealField::from_function(g, [](const Vec3&) { return 3.0; });
  CHECK(max_abs(apply_theta(f, flat, 0.2)) < 1e-12);

  // limit: Theta f = -V' d_xi f
  const RealField v = RealField::from_function(g, [](const Vec3& x) { return std::sin(x[0]); });
  const WignerGrid lim = apply_theta(f, v, 0.0);
  double err = 0.0;
  for (std::size_t ix = 0; ix < f.x_size(); ++ix)
    for (std::size_t k = 0; k < f.xi_size(); ++k) {
      const double x = g.position(0, static_cast<int>(ix)), s = f.xi_point(k)[0];
      err = std::max(err, std::abs(lim.at(ix, k) - (-std::cos(x)) * gx(x) * (-s * h(s))));
    }
  CHECK(err < 1e-10);

  const WignerGrid small = apply_theta(f, v, 1e-3);
  double gap = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    gap = std::max(gap, std::abs(small.values()[i] - lim.values()[i]));
    scale = std::max(scale, std::abs(lim.values()[i]));
  }
  CHECK(gap / scale < 1e-2);
}

TEST_CASE("weak pairing closed forms and resolution checks") {
  const SpectralGrid g = make_grid_1d(kL, 128);
  XiAxes xi{};
  xi[0] = {128, 8.0};
  TestFunction phi;
  phi.x_center = {0.4, 0, 0};
  phi.xi_center = {-0.5, 0, 0};
  phi.x_width = {0.9, 1, 1};
  phi.xi_width = {0.7, 1, 1};
  WignerGrid zero(g, xi, 0.2);
  CHECK(weak_pairing(zero, phi) == 0.0);
  WignerGrid self(g, xi, 0.2);
  for (std::size_t ix = 0; ix < self.x_size(); ++ix)
    for (std::size_t k = 0; k < self.xi_size(); ++k) self.at(ix, k) = phi(g.point(ix), self.xi_point(k), g);
  CHECK(weak_pairing(self, phi) == doctest::Approx(pi * 0.9 * 0.7).epsilon(1e-10));

  const double sigma = 0.5, eps = 0.25;
  const WignerGrid f = wigner_transform(gaussian_pure_state(g, eps, sigma));
  TestFunction unit;
  const double oracle = std::sqrt(pi / (1 / (sigma * sigma) + 0.5)) *
                        std::sqrt(pi / (sigma * sigma / (eps * eps) + 0.5)) / (pi * eps);
  CHECK(weak_pairing(f, unit) == doctest::Approx(oracle).epsilon(1e-8));

  TestFunction thin = phi;
  thin.x_width = {0.1, 1, 1};
  CHECK_THROWS_AS(weak_pairing(self, thin), std::invalid_argument);
  TestFunction wide = phi;
  wide.xi_width = {3.0, 1, 1};
  CHECK_THROWS_AS(weak_pairing(self, wide), std::invalid_argument);
}

TEST_CASE("evolution residual: frozen data, mismatched tags, free plane waves") {
  const SpectralGrid g = make_grid_1d(kL, 128);
  const double eps = 0.25;
  const WignerGrid f = wigner_transform(gaussian_pure_state(g, eps, 0.5));
  TestFunction phi;
  phi.x_center = {0.3, 0, 0};
  phi.x_width = {0.5, 1, 1};
  phi.xi_width = {0.8, 1, 1};
  const std::vector<TestFunction> phis{phi};
  const RealField zero(g);
  const ResidualReport frozen = evolution_residual(f, f, f, zero, 0.01, phis);
  CHECK(frozen.per_function[0] == doctest::Approx(-weak_pairing(apply_gamma(f, eps), phi)).epsilon(1e-12));

  WignerGrid other = f;
  other.set_epsilon(0.5);
  CHECK_THROWS_AS(evolution_residual(f, other, f, zero, 0.01, phis), std::invalid_argument);

  // two-plane-wave superposition under exact free flow
  const int k1 = 3, k2 = 7;
  auto psi = [&](double t) {
    auto om = [&](int k) { return std::sqrt(eps * eps * std::pow(2 * pi * k / kL, 2) + 1.0) / eps; };
    return ComplexField::from_function(g, [&](const Vec3& x) {
      return (std::polar(1.0, 2 * pi * k1 * x[0] / kL - om(k1) * t) +
              std::polar(1.0, 2 * pi * k2 * x[0] / kL - om(k2) * t)) / std::sqrt(2 * kL);
    });
  };
  const double dt = 1e-3, t = 0.4;
  auto snap = [&](double tt) { return wigner_transform(MixedState(eps, {1.0}, {psi(tt)}, g)); };
  TestFunction q;
  q.xi_center = {eps * 2 * pi * 5 / kL, 0, 0};
  q.x_width = {0.7, 1, 1};
  q.xi_width = {0.3, 1, 1};
  const std::vector<TestFunction> qs{q};
  const ResidualReport free = evolution_residual(snap(t - dt), snap(t), snap(t + dt), zero, dt, qs);
  CHECK(free.max_abs < 1e-6);
}
