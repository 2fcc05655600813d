#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include "sclim/field_io.hpp"
#include "sclim/spectral.hpp"

using namespace sclim;
using std::numbers::pi;

namespace {

ComplexField random_field(const SpectralGrid& g, std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  ComplexField f(g);
  for (std::size_t i = 0; i < g.size(); ++i) f[i] = Complex(n(rng), n(rng));
  return f;
}

double max_diff(const ComplexField& a, const ComplexField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("make_grid wavenumbers and spacing") {
  const SpectralGrid g = make_grid_1d(2 * pi, 8);
  std::vector<double> xi;
  for (int i = 0; i < 8; ++i) xi.push_back(g.wavenumber(0, i));
  CHECK(xi == std::vector<double>{0, 1, 2, 3, -4, -3, -2, -1});
  CHECK(g.is_nyquist(0, 4));
  CHECK(make_grid_1d(1.0, 4).spacing(0) == 0.25);
  const double l[2] = {2 * pi, 2 * pi};
  const int n[2] = {8, 8};
  const SpectralGrid g2 = make_grid(2, l, n);
  CHECK(g2.size() == 64);
  CHECK(g2.position(0, 0) == doctest::Approx(-pi));
}

TEST_CASE("make_grid rejects odd counts and non-positive lengths") {
  CHECK_THROWS_AS(make_grid_1d(1.0, 7), std::invalid_argument);
  CHECK_THROWS_AS(make_grid_1d(1.0, 12), std::invalid_argument);
  CHECK_THROWS_AS(make_grid_1d(0.0, 8), std::invalid_argument);
  CHECK_THROWS_AS(make_grid_1d(-1.0, 8), std::invalid_argument);
}

TEST_CASE("transform of constant and single harmonic") {
  const SpectralGrid g = make_grid_1d(2 * pi, 8);
  const ComplexField one = forward_transform(ComplexField::from_function(g, [](const Vec3&) { return Complex(1.0); }));
  CHECK(std::abs(one[0]) > 1.0);
  for (std::size_t i = 1; i < 8; ++i) CHECK(std::abs(one[i]) < 1e-14);
  // e^{ix}: coefficient sits at k = 1 and carries the phase of the origin offset
  const ComplexField e = forward_transform(
      ComplexField::from_function(g, [](const Vec3& x) { return std::polar(1.0, x[0]); }));
  for (std::size_t i = 0; i < 8; ++i) CHECK((i == 1 ? std::abs(e[i]) > 1.0 : std::abs(e[i]) < 1e-14));
  CHECK(std::abs(e[1]) == doctest::Approx(2 * pi / std::sqrt(2 * pi)));
}

TEST_CASE("representation mismatch is rejected") {
  const SpectralGrid g = make_grid_1d(1.0, 8);
  ComplexField f(g);
  CHECK_THROWS_AS(inverse_transform(f), std::invalid_argument);
  CHECK_THROWS_AS(forward_transform(forward_transform(f)), std::invalid_argument);
}

TEST_CASE("round trip and Parseval on random fields in 1, 2 and 3 dimensions") {
  std::mt19937_64 rng(7);
  const double l[3] = {3.0, 5.0, 2.0};
  const int n[3] = {16, 8, 4};
  for (int d = 1; d <= 3; ++d) {
    const SpectralGrid g = make_grid(d, l, n);
    const ComplexField f = random_field(g, rng);
    const ComplexField c = forward_transform(f);
    const ComplexField back = inverse_transform(c);
    double scale = 0.0, lhs = 0.0, rhs = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      scale = std::max(scale, std::abs(f[i]));
      lhs += std::norm(f[i]);
      rhs += std::norm(c[i]);
    }
    CHECK(max_diff(back, f) / scale < 1e-12);
    lhs *= g.cell_volume();
    rhs *= g.mode_volume();
    CHECK(std::abs(lhs - rhs) / lhs < 1e-12);
  }
}

TEST_CASE("apply_multiplier: dispersion symbol and composition") {
  const SpectralGrid g = make_grid_1d(2 * pi, 16);
  auto disp = [](const Vec3& k) { return std::sqrt(k[0] * k[0] + 1.0); };
  const ComplexField wave = ComplexField::from_function(g, [](const Vec3& x) { return std::polar(1.0, 3 * x[0]); });
  const ComplexField m = apply_multiplier(wave, disp);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(std::abs(m[i] - std::sqrt(10.0) * wave[i]) < 1e-12);
  const ComplexField flat = ComplexField::from_function(g, [](const Vec3&) { return Complex(2.0); });
  CHECK(max_diff(apply_multiplier(flat, disp), flat) < 1e-13);

  std::mt19937_64 rng(3);
  const ComplexField f = random_field(g, rng);
  CHECK(max_diff(apply_multiplier(f, [](const Vec3&) { return 1.0; }), f) < 1e-12);
  auto m1 = [](const Vec3& k) { return std::exp(-0.1 * k[0] * k[0]); };
  auto m2 = [](const Vec3& k) { return 1.0 + std::abs(k[0]); };
  const ComplexField two = apply_multiplier(apply_multiplier(f, m1), m2);
  const ComplexField one = apply_multiplier(f, [&](const Vec3& k) { return m1(k) * m2(k); });
  CHECK(max_diff(two, one) < 1e-12);
  CHECK_THROWS_AS(apply_multiplier(f, [](const Vec3& k) { return 1.0 / k[0]; }), std::invalid_argument);
}

TEST_CASE("real even multiplier keeps real fields real") {
  const SpectralGrid g = make_grid_1d(4.0, 32);
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n;
  RealField f(g);
  for (auto& v : f.values()) v = n(rng);
  double imag = 1.0;
  (void)apply_multiplier(f, [](const Vec3& k) { return std::cos(k[0]); }, &imag);
  CHECK(imag < 1e-13);
}

TEST_CASE("trig_interpolate: harmonic, grid nodes and direct-sum oracle") {
  const SpectralGrid g = make_grid_1d(2 * pi, 16);
  const ComplexField e = ComplexField::from_function(g, [](const Vec3& x) { return std::polar(1.0, x[0]); });
  CHECK(std::abs(trig_interpolate(e, Vec3{pi / 3, 0, 0}) - std::polar(1.0, pi / 3)) < 1e-12);
  // periodic wrapping
  CHECK(std::abs(trig_interpolate(e, Vec3{pi / 3 + 4 * pi, 0, 0}) - std::polar(1.0, pi / 3)) < 1e-12);

  std::mt19937_64 rng(5);
  const ComplexField f = random_field(g, rng);
  std::vector<Vec3> nodes;
  for (std::size_t i = 0; i < g.size(); ++i) nodes.push_back(g.point(i));
  const auto at_nodes = trig_interpolate(f, nodes);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(std::abs(at_nodes[i] - f[i]) < 1e-12);

  // band-limited field from explicit modes |k| < N/2, summed directly
  const double l2 = 3.0;
  const SpectralGrid h = make_grid_1d(l2, 32);
  std::normal_distribution<double> nd;
  std::vector<std::pair<int, Complex>> modes;
  for (int k = -15; k <= 15; ++k) modes.push_back({k, Complex(nd(rng), nd(rng))});
  auto series = [&](double x) {
    Complex s = 0.0;
    for (auto [k, a] : modes) s += a * std::polar(1.0, 2 * pi * k * x / l2);
    return s;
  };
  const ComplexField b = ComplexField::from_function(h, [&](const Vec3& x) { return series(x[0]); });
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int trial = 0; trial < 50; ++trial) {
    const double x = u(rng);
    CHECK(std::abs(trig_interpolate(b, Vec3{x, 0, 0}) - series(x)) < 1e-10);
  }
}

TEST_CASE("shift and upsample are exact for band-limited fields") {
  const SpectralGrid g = make_grid_1d(2.0, 16);
  auto fn = [](double x) { return std::polar(1.0, 2 * pi * 3 * x / 2.0) + 0.5 * std::cos(2 * pi * x / 2.0); };
  const ComplexField f = ComplexField::from_function(g, [&](const Vec3& x) { return fn(x[0]); });
  const ComplexField s = shift(f, Vec3{0.37, 0, 0});
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(std::abs(s[i] - fn(g.position(0, i) + 0.37)) < 1e-12);
  const ComplexField up = upsample2(f);
  CHECK(up.grid().count(0) == 32);
  for (std::size_t i = 0; i < up.size(); ++i) CHECK(std::abs(up[i] - fn(up.grid().position(0, i))) < 1e-12);
  // Nyquist content is split evenly: cos(K(x - x0)) survives refinement unchanged
  const double kn = g.nyquist_wavenumber(0);
  const ComplexField ny =
      ComplexField::from_function(g, [&](const Vec3& x) { return Complex(std::cos(kn * (x[0] - g.origin(0)))); });
  const ComplexField nyu = upsample2(ny);
  for (std::size_t i = 0; i < nyu.size(); ++i)
    CHECK(std::abs(nyu[i] - std::cos(kn * (nyu.grid().position(0, i) - g.origin(0)))) < 1e-12);
}

TEST_CASE("field dumps round trip bit-exactly") {
  const double l[2] = {1.0, 2.0};
  const int n[2] = {8, 4};
  const SpectralGrid g = make_grid(2, l, n);
  std::mt19937_64 rng(9);
  const ComplexField f = random_field(g, rng);
  const auto dir = std::filesystem::temp_directory_path() / "sclim_test_io";
  std::filesystem::create_directories(dir);
  io::write_field(dir / "c", f);
  const ComplexField back = io::read_complex_field(dir / "c");
  CHECK(back.grid() == g);
  for (std::size_t i = 0; i < f.size(); ++i) CHECK(back[i] == f[i]);
  RealField r(g);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = f[i].real();
  io::write_field(dir / "r", r);
  const RealField rb = io::read_real_field(dir / "r");
  for (std::size_t i = 0; i < r.size(); ++i) CHECK(rb[i] == r[i]);
  CHECK(std::filesystem::file_size(dir / "r.bin") == 8 * g.size());
  std::filesystem::remove_all(dir);
}
