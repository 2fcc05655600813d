#include "sclim/profile.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace sclim {

namespace {

double gauss(double u, double mu, double s) {
  const double z = (u - mu) / s;
  return std::exp(-0.5 * z * z) / (std::sqrt(2.0 * std::numbers::pi) * s);
}

double interval_mass(double lo, double hi, double mu, double s) {
  const double r = 1.0 / (std::sqrt(2.0) * s);
  return 0.5 * (std::erf((hi - mu) * r) - std::erf((lo - mu) * r));
}

}  // namespace

PhaseSpaceProfile::PhaseSpaceProfile(int dim, std::vector<GaussianComponent> components)
    : dim_(dim), components_(std::move(components)) {
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("profile dimension must be 1, 2 or 3");
  for (const auto& c : components_) {
    if (!(c.weight >= 0.0) || !std::isfinite(c.weight))
      throw std::invalid_argument("profile weights must be finite and non-negative");
    for (int a = 0; a < dim; ++a)
      if (!(c.x_width[a] > 0.0) || !(c.xi_width[a] > 0.0))
        throw std::invalid_argument("profile widths must be positive");
  }
}

double PhaseSpaceProfile::mass() const noexcept {
  double m = 0.0;
  for (const auto& c : components_) m += c.weight;
  return m;
}

double PhaseSpaceProfile::operator()(const Vec3& x, const Vec3& xi) const noexcept {
  double f = 0.0;
  for (const auto& c : components_) {
    double v = c.weight;
    for (int a = 0; a < dim_; ++a)
      v *= gauss(x[a], c.x_center[a], c.x_width[a]) * gauss(xi[a], c.xi_center[a], c.xi_width[a]);
    f += v;
  }
  return f;
}

double PhaseSpaceProfile::mass_in(const PhaseBox& box) const noexcept {
  double m = 0.0;
  for (const auto& c : components_) {
    double v = c.weight;
    for (int a = 0; a < dim_; ++a)
      v *= interval_mass(box.x_lo[a], box.x_hi[a], c.x_center[a], c.x_width[a]) *
           interval_mass(box.xi_lo[a], box.xi_hi[a], c.xi_center[a], c.xi_width[a]);
    m += v;
  }
  return m;
}

PhaseBox PhaseSpaceProfile::support(double sigmas) const noexcept {
  constexpr double inf = std::numeric_limits<double>::infinity();
  PhaseBox b;
  for (int a = 0; a < kMaxDim; ++a) {
    b.x_lo[a] = b.xi_lo[a] = inf;
    b.x_hi[a] = b.xi_hi[a] = -inf;
  }
  for (const auto& c : components_) {
    if (c.weight == 0.0) continue;
    for (int a = 0; a < dim_; ++a) {
      b.x_lo[a] = std::min(b.x_lo[a], c.x_center[a] - sigmas * c.x_width[a]);
      b.x_hi[a] = std::max(b.x_hi[a], c.x_center[a] + sigmas * c.x_width[a]);
      b.xi_lo[a] = std::min(b.xi_lo[a], c.xi_center[a] - sigmas * c.xi_width[a]);
      b.xi_hi[a] = std::max(b.xi_hi[a], c.xi_center[a] + sigmas * c.xi_width[a]);
    }
  }
  for (int a = dim_; a < kMaxDim; ++a) b.x_lo[a] = b.x_hi[a] = b.xi_lo[a] = b.xi_hi[a] = 0.0;
  return b;
}

Vec3 PhaseSpaceProfile::mean_x() const noexcept {
  Vec3 m{0.0, 0.0, 0.0};
  const double total = mass();
  if (total == 0.0) return m;
  for (const auto& c : components_)
    for (int a = 0; a < dim_; ++a) m[a] += c.weight * c.x_center[a] / total;
  return m;
}

Vec3 PhaseSpaceProfile::mean_xi() const noexcept {
  Vec3 m{0.0, 0.0, 0.0};
  const double total = mass();
  if (total == 0.0) return m;
  for (const auto& c : components_)
    for (int a = 0; a < dim_; ++a) m[a] += c.weight * c.xi_center[a] / total;
  return m;
}

Vec3 PhaseSpaceProfile::std_x() const noexcept {
  Vec3 s{0.0, 0.0, 0.0};
  const double total = mass();
  if (total == 0.0) return s;
  const Vec3 mu = mean_x();
  for (const auto& c : components_)
    for (int a = 0; a < dim_; ++a) {
      const double d = c.x_center[a] - mu[a];
      s[a] += c.weight * (c.x_width[a] * c.x_width[a] + d * d) / total;
    }
  for (auto& v : s) v = std::sqrt(v);
  return s;
}

Vec3 PhaseSpaceProfile::std_xi() const noexcept {
  Vec3 s{0.0, 0.0, 0.0};
  const double total = mass();
  if (total == 0.0) return s;
  const Vec3 mu = mean_xi();
  for (const auto& c : components_)
    for (int a = 0; a < dim_; ++a) {
      const double d = c.xi_center[a] - mu[a];
      s[a] += c.weight * (c.xi_width[a] * c.xi_width[a] + d * d) / total;
    }
  for (auto& v : s) v = std::sqrt(v);
  return s;
}

}  // namespace sclim
