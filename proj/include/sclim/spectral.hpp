#pragma once

// Periodic grids, unitary discrete Fourier transforms, Fourier multipliers
// and band-limited interpolation.
//
// Transform convention (used by every module):
//
//   position   x_n = x0 + n*dx,   x0 = -L/2,  dx = L/N        (per axis)
//   wavenumber xi_k = 2*pi*k/L,   k in [-N/2, N/2)
//   forward    c_k = (dx/sqrt(2*pi))^d * sum_n f_n exp(-i xi_k . (x_n - x0))
//   inverse    f_n = (sqrt(2*pi)/L)^d  * sum_k c_k exp(+i xi_k . (x_n - x0))
//
// so that Parseval reads  sum |f_n|^2 dx^d == sum |c_k|^2 (2*pi/L)^d.
// Phases are taken relative to the grid origin x0. Coefficients are stored in
// FFT order per axis: k = 0, 1, ..., N/2-1, -N/2, ..., -1. The single
// unpaired k = -N/2 entry is the Nyquist mode; odd (derivative-like) symbols
// zero it, interpolation splits it evenly between +-N/2.

#include <array>
#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace sclim {

inline constexpr int kMaxDim = 3;
using Complex = std::complex<double>;
using Vec3 = std::array<double, kMaxDim>;
using Index3 = std::array<int, kMaxDim>;

class SpectralGrid {
 public:
  SpectralGrid() = default;

  /// Validates: 1 <= dim <= 3, every N a power of two >= 4, every L > 0.
  SpectralGrid(int dim, std::span<const double> lengths, std::span<const int> counts);

  int dim() const noexcept { return dim_; }
  double length(int axis) const noexcept { return lengths_[axis]; }
  int count(int axis) const noexcept { return counts_[axis]; }
  double spacing(int axis) const noexcept { return lengths_[axis] / counts_[axis]; }
  double origin(int axis) const noexcept { return -0.5 * lengths_[axis]; }
  std::size_t size() const noexcept { return size_; }
  std::vector<int> shape() const { return {counts_.begin(), counts_.begin() + dim_}; }

  /// Quadrature weight of one grid cell, prod dx.
  double cell_volume() const noexcept;
  /// Weight of one Fourier mode in Parseval sums, prod 2*pi/L.
  double mode_volume() const noexcept;

  double position(int axis, int i) const noexcept { return origin(axis) + i * spacing(axis); }
  /// Signed mode number k for storage index i (FFT order).
  int mode_index(int axis, int i) const noexcept { return i < counts_[axis] / 2 ? i : i - counts_[axis]; }
  double wavenumber(int axis, int i) const noexcept;
  bool is_nyquist(int axis, int i) const noexcept { return i == counts_[axis] / 2; }
  double nyquist_wavenumber(int axis) const noexcept;

  Index3 unravel(std::size_t flat) const noexcept;
  std::size_t ravel(const Index3& idx) const noexcept;
  Vec3 point(std::size_t flat) const noexcept;
  Vec3 wavevector(std::size_t flat) const noexcept;
  /// True if any axis index of the flat Fourier index is a Nyquist index.
  bool touches_nyquist(std::size_t flat) const noexcept;

  friend bool operator==(const SpectralGrid&, const SpectralGrid&) = default;

 private:
  int dim_ = 0;
  std::array<double, kMaxDim> lengths_{1.0, 1.0, 1.0};
  std::array<int, kMaxDim> counts_{1, 1, 1};
  std::size_t size_ = 0;
};

SpectralGrid make_grid(int dim, std::span<const double> lengths, std::span<const int> counts);
SpectralGrid make_grid_1d(double length, int count);

enum class Representation { physical, fourier };

class ComplexField {
 public:
  ComplexField() = default;
  explicit ComplexField(SpectralGrid grid, Representation rep = Representation::physical);
  ComplexField(SpectralGrid grid, std::vector<Complex> values,
               Representation rep = Representation::physical);

  static ComplexField from_function(const SpectralGrid& grid,
                                    const std::function<Complex(const Vec3&)>& fn);

  const SpectralGrid& grid() const noexcept { return grid_; }
  Representation representation() const noexcept { return rep_; }
  std::span<const Complex> values() const noexcept { return values_; }
  std::span<Complex> values() noexcept { return values_; }
  std::vector<Complex>& storage() noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  Complex operator[](std::size_t i) const noexcept { return values_[i]; }
  Complex& operator[](std::size_t i) noexcept { return values_[i]; }

 private:
  SpectralGrid grid_;
  std::vector<Complex> values_;
  Representation rep_ = Representation::physical;
};

/// Real samples in the physical representation.
class RealField {
 public:
  RealField() = default;
  explicit RealField(SpectralGrid grid);
  RealField(SpectralGrid grid, std::vector<double> values);

  static RealField from_function(const SpectralGrid& grid,
                                 const std::function<double(const Vec3&)>& fn);

  const SpectralGrid& grid() const noexcept { return grid_; }
  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const noexcept { return values_[i]; }
  double& operator[](std::size_t i) noexcept { return values_[i]; }

 private:
  SpectralGrid grid_;
  std::vector<double> values_;
};

ComplexField to_complex(const RealField& field);
/// Drops the imaginary part; the largest discarded |Im| goes to *max_imag.
RealField real_part(const ComplexField& field, double* max_imag = nullptr);

/// Throws std::invalid_argument on a representation mismatch.
ComplexField forward_transform(ComplexField field);
ComplexField inverse_transform(ComplexField field);

namespace fft {

/// Normalized in-place transforms of one field's samples (see header comment).
void forward(std::span<Complex> data, const SpectralGrid& grid);
void inverse(std::span<Complex> data, const SpectralGrid& grid);

/// Raw (unnormalized) in-place DFT over the axes [first_axis, first_axis + n_axes)
/// of a row-major array of the given shape. sign = -1 forward, +1 backward.
void transform_axes(std::span<Complex> data, std::span<const int> shape, int first_axis,
                    int n_axes, int sign);

}  // namespace fft

using Symbol = std::function<double(const Vec3&)>;

/// Tabulates m(xi) over the grid's Fourier indices; throws on non-finite values.
std::vector<double> tabulate_symbol(const SpectralGrid& grid, const Symbol& symbol,
                                    bool zero_nyquist = false);

/// Physical-space result of multiplying the Fourier coefficients by m(xi).
ComplexField apply_multiplier(const ComplexField& field, const Symbol& symbol);
/// For real fields; the result is real when m is real and even.
RealField apply_multiplier(const RealField& field, const Symbol& symbol,
                           double* max_imag = nullptr);

/// Band-limited (trigonometric) interpolation, periodic in every axis.
Complex trig_interpolate(const ComplexField& field, const Vec3& point);
std::vector<Complex> trig_interpolate(const ComplexField& field, std::span<const Vec3> points);
std::vector<double> trig_interpolate(const RealField& field, std::span<const Vec3> points);

/// g(x) = f(x + offset) sampled on the same grid (exact for band-limited f).
ComplexField shift(const ComplexField& field, const Vec3& offset);
RealField shift(const RealField& field, const Vec3& offset);

/// Samples of the band-limited interpolant on the grid refined by 2 per axis.
ComplexField upsample2(const ComplexField& field);

/// Multiplier applied to the Nyquist coefficient by a shift of `offset` on one axis.
double nyquist_shift_factor(double nyquist_wavenumber, double offset) noexcept;

double l2_norm(const ComplexField& field);
double integrate(const RealField& field);
Complex inner_product(const ComplexField& a, const ComplexField& b);

}  // namespace sclim
