#pragma once

// Phase-space profiles f0(x, xi) given as weighted sums of axis-aligned
// Gaussians; each component integrates to its weight over R^d x R^d.

#include <vector>

#include "sclim/spectral.hpp"

namespace sclim {

struct GaussianComponent {
  double weight = 1.0;
  Vec3 x_center{0.0, 0.0, 0.0};
  Vec3 xi_center{0.0, 0.0, 0.0};
  Vec3 x_width{1.0, 1.0, 1.0};
  Vec3 xi_width{1.0, 1.0, 1.0};
};

/// Axis-aligned box [lo, hi] per axis in x and in xi.
struct PhaseBox {
  Vec3 x_lo{}, x_hi{}, xi_lo{}, xi_hi{};
};

class PhaseSpaceProfile {
 public:
  PhaseSpaceProfile() = default;
  /// Rejects negative weights and non-positive widths.
  PhaseSpaceProfile(int dim, std::vector<GaussianComponent> components);

  int dim() const noexcept { return dim_; }
  const std::vector<GaussianComponent>& components() const noexcept { return components_; }
  bool empty() const noexcept { return mass() == 0.0; }

  double mass() const noexcept;
  double operator()(const Vec3& x, const Vec3& xi) const noexcept;
  /// Mass of f0 inside the box (closed-form erf products).
  double mass_in(const PhaseBox& box) const noexcept;
  /// Smallest box containing every component's center +- sigmas * width.
  PhaseBox support(double sigmas) const noexcept;
  Vec3 mean_x() const noexcept;
  Vec3 mean_xi() const noexcept;
  Vec3 std_x() const noexcept;
  Vec3 std_xi() const noexcept;

 private:
  int dim_ = 1;
  std::vector<GaussianComponent> components_;
};

}  // namespace sclim
