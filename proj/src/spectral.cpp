#include "sclim/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <tuple>

namespace sclim {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace

SpectralGrid::SpectralGrid(int dim, std::span<const double> lengths, std::span<const int> counts) {
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("grid dimension must be 1, 2 or 3");
  if (static_cast<int>(lengths.size()) < dim || static_cast<int>(counts.size()) < dim)
    throw std::invalid_argument("grid needs one length and one count per axis");
  dim_ = dim;
  size_ = 1;
  for (int a = 0; a < dim; ++a) {
    if (!(lengths[a] > 0.0) || !std::isfinite(lengths[a]))
      throw std::invalid_argument("grid length must be positive, got " + std::to_string(lengths[a]));
    if (counts[a] % 2 != 0) throw std::invalid_argument("grid point count must be even");
    if (!is_power_of_two(counts[a]) || counts[a] < 4)
      throw std::invalid_argument("grid point count must be a power of two >= 4, got " +
                                  std::to_string(counts[a]));
    lengths_[a] = lengths[a];
    counts_[a] = counts[a];
    size_ *= static_cast<std::size_t>(counts[a]);
  }
}

double SpectralGrid::cell_volume() const noexcept {
  double v = 1.0;
  for (int a = 0; a < dim_; ++a) v *= spacing(a);
  return v;
}

double SpectralGrid::mode_volume() const noexcept {
  double v = 1.0;
  for (int a = 0; a < dim_; ++a) v *= kTwoPi / lengths_[a];
  return v;
}

double SpectralGrid::wavenumber(int axis, int i) const noexcept {
  return kTwoPi * mode_index(axis, i) / lengths_[axis];
}

double SpectralGrid::nyquist_wavenumber(int axis) const noexcept {
  return std::numbers::pi * counts_[axis] / lengths_[axis];
}

Index3 SpectralGrid::unravel(std::size_t flat) const noexcept {
  Index3 idx{0, 0, 0};
  for (int a = dim_ - 1; a >= 0; --a) {
    idx[a] = static_cast<int>(flat % counts_[a]);
    flat /= counts_[a];
  }
  return idx;
}

std::size_t SpectralGrid::ravel(const Index3& idx) const noexcept {
  std::size_t flat = 0;
  for (int a = 0; a < dim_; ++a) flat = flat * counts_[a] + static_cast<std::size_t>(idx[a]);
  return flat;
}

Vec3 SpectralGrid::point(std::size_t flat) const noexcept {
  const Index3 idx = unravel(flat);
  Vec3 p{0.0, 0.0, 0.0};
  for (int a = 0; a < dim_; ++a) p[a] = position(a, idx[a]);
  return p;
}

Vec3 SpectralGrid::wavevector(std::size_t flat) const noexcept {
  const Index3 idx = unravel(flat);
  Vec3 k{0.0, 0.0, 0.0};
  for (int a = 0; a < dim_; ++a) k[a] = wavenumber(a, idx[a]);
  return k;
}

bool SpectralGrid::touches_nyquist(std::size_t flat) const noexcept {
  const Index3 idx = unravel(flat);
  for (int a = 0; a < dim_; ++a)
    if (is_nyquist(a, idx[a])) return true;
  return false;
}

SpectralGrid make_grid(int dim, std::span<const double> lengths, std::span<const int> counts) {
  return SpectralGrid(dim, lengths, counts);
}

SpectralGrid make_grid_1d(double length, int count) {
  const double l[1] = {length};
  const int n[1] = {count};
  return SpectralGrid(1, l, n);
}

ComplexField::ComplexField(SpectralGrid grid, Representation rep)
    : grid_(std::move(grid)), values_(grid_.size()), rep_(rep) {}

ComplexField::ComplexField(SpectralGrid grid, std::vector<Complex> values, Representation rep)
    : grid_(std::move(grid)), values_(std::move(values)), rep_(rep) {
  if (values_.size() != grid_.size()) throw std::invalid_argument("field size does not match grid");
}

ComplexField ComplexField::from_function(const SpectralGrid& grid,
                                         const std::function<Complex(const Vec3&)>& fn) {
  ComplexField f(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) f[i] = fn(grid.point(i));
  return f;
}

RealField::RealField(SpectralGrid grid) : grid_(std::move(grid)), values_(grid_.size(), 0.0) {}

RealField::RealField(SpectralGrid grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_.size()) throw std::invalid_argument("field size does not match grid");
}

RealField RealField::from_function(const SpectralGrid& grid,
                                   const std::function<double(const Vec3&)>& fn) {
  RealField f(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) f[i] = fn(grid.point(i));
  return f;
}

ComplexField to_complex(const RealField& field) {
  std::vector<Complex> v(field.values().begin(), field.values().end());
  return ComplexField(field.grid(), std::move(v));
}

RealField real_part(const ComplexField& field, double* max_imag) {
  if (field.representation() != Representation::physical)
    throw std::invalid_argument("real_part needs a physical-space field");
  std::vector<double> v(field.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < field.size(); ++i) {
    v[i] = field[i].real();
    worst = std::max(worst, std::abs(field[i].imag()));
  }
  if (max_imag) *max_imag = worst;
  return RealField(field.grid(), std::move(v));
}

namespace fft {

namespace {

struct PlanKey {
  std::vector<int> shape;
  int first_axis;
  int n_axes;
  int sign;
  auto operator<=>(const PlanKey&) const = default;
};

class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(const PlanKey& key) {
    std::lock_guard lock(mutex_);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    const int rank_total = static_cast<int>(key.shape.size());
    std::vector<std::ptrdiff_t> stride(rank_total, 1);
    for (int a = rank_total - 2; a >= 0; --a) stride[a] = stride[a + 1] * key.shape[a + 1];
    std::vector<fftw_iodim> dims, loops;
    std::size_t total = 1;
    for (int a = 0; a < rank_total; ++a) {
      total *= static_cast<std::size_t>(key.shape[a]);
      fftw_iodim d{key.shape[a], static_cast<int>(stride[a]), static_cast<int>(stride[a])};
      if (a >= key.first_axis && a < key.first_axis + key.n_axes)
        dims.push_back(d);
      else
        loops.push_back(d);
    }
    auto* buf = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * total));
    fftw_plan plan = fftw_plan_guru_dft(static_cast<int>(dims.size()), dims.data(),
                                        static_cast<int>(loops.size()), loops.data(), buf, buf,
                                        key.sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(buf);
    if (!plan) throw std::runtime_error("FFTW failed to create a plan");
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<PlanKey, fftw_plan> plans_;
};

PlanCache& plan_cache() {
  static PlanCache cache;
  return cache;
}

}  // namespace

void transform_axes(std::span<Complex> data, std::span<const int> shape, int first_axis,
                    int n_axes, int sign) {
  PlanKey key{{shape.begin(), shape.end()}, first_axis, n_axes, sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD};
  fftw_plan plan = plan_cache().get(key);
  auto* p = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan, p, p);
}

void forward(std::span<Complex> data, const SpectralGrid& grid) {
  const auto shape = grid.shape();
  transform_axes(data, shape, 0, grid.dim(), -1);
  const double scale = grid.cell_volume() / std::pow(std::sqrt(kTwoPi), grid.dim());
  for (auto& c : data) c *= scale;
}

void inverse(std::span<Complex> data, const SpectralGrid& grid) {
  const auto shape = grid.shape();
  transform_axes(data, shape, 0, grid.dim(), +1);
  double scale = 1.0;
  for (int a = 0; a < grid.dim(); ++a) scale *= std::sqrt(kTwoPi) / grid.length(a);
  for (auto& c : data) c *= scale;
}

}  // namespace fft

ComplexField forward_transform(ComplexField field) {
  if (field.representation() != Representation::physical)
    throw std::invalid_argument("forward_transform expects a physical-space field");
  fft::forward(field.values(), field.grid());
  return ComplexField(field.grid(), std::move(field.storage()), Representation::fourier);
}

ComplexField inverse_transform(ComplexField field) {
  if (field.representation() != Representation::fourier)
    throw std::invalid_argument("inverse_transform expects a Fourier-space field");
  fft::inverse(field.values(), field.grid());
  return ComplexField(field.grid(), std::move(field.storage()), Representation::physical);
}

std::vector<double> tabulate_symbol(const SpectralGrid& grid, const Symbol& symbol,
                                    bool zero_nyquist) {
  std::vector<double> table(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (zero_nyquist && grid.touches_nyquist(i)) {
      table[i] = 0.0;
      continue;
    }
    const double m = symbol(grid.wavevector(i));
    if (!std::isfinite(m)) throw std::invalid_argument("multiplier is not finite on the grid");
    table[i] = m;
  }
  return table;
}

ComplexField apply_multiplier(const ComplexField& field, const Symbol& symbol) {
  const auto table = tabulate_symbol(field.grid(), symbol);
  ComplexField work = field.representation() == Representation::physical
                          ? forward_transform(field)
                          : field;
  for (std::size_t i = 0; i < work.size(); ++i) work[i] *= table[i];
  return inverse_transform(std::move(work));
}

RealField apply_multiplier(const RealField& field, const Symbol& symbol, double* max_imag) {
  return real_part(apply_multiplier(to_complex(field), symbol), max_imag);
}

double nyquist_shift_factor(double nyquist_wavenumber, double offset) noexcept {
  return std::cos(nyquist_wavenumber * offset);
}

namespace {

// Per-axis Fourier basis values exp(i xi_k (p - x0)) with the Nyquist entry
// replaced by cos(K (p - x0)).
std::vector<Complex> axis_phases(const SpectralGrid& grid, int axis, double p) {
  const int n = grid.count(axis);
  std::vector<Complex> ph(n);
  const double u = p - grid.origin(axis);
  for (int i = 0; i < n; ++i) {
    if (grid.is_nyquist(axis, i))
      ph[i] = std::cos(grid.nyquist_wavenumber(axis) * u);
    else
      ph[i] = std::polar(1.0, grid.wavenumber(axis, i) * u);
  }
  return ph;
}

Complex evaluate_series(const SpectralGrid& grid, std::span<const Complex> coeffs, const Vec3& p) {
  double scale = 1.0;
  for (int a = 0; a < grid.dim(); ++a) scale *= std::sqrt(kTwoPi) / grid.length(a);
  std::array<std::vector<Complex>, kMaxDim> ph;
  for (int a = 0; a < grid.dim(); ++a) ph[a] = axis_phases(grid, a, p[a]);
  Complex sum = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Index3 idx = grid.unravel(i);
    Complex term = coeffs[i];
    for (int a = 0; a < grid.dim(); ++a) term *= ph[a][idx[a]];
    sum += term;
  }
  return sum * scale;
}

ComplexField to_fourier(const ComplexField& field) {
  return field.representation() == Representation::fourier ? field : forward_transform(field);
}

}  // namespace

Complex trig_interpolate(const ComplexField& field, const Vec3& point) {
  const ComplexField c = to_fourier(field);
  return evaluate_series(c.grid(), c.values(), point);
}

std::vector<Complex> trig_interpolate(const ComplexField& field, std::span<const Vec3> points) {
  const ComplexField c = to_fourier(field);
  std::vector<Complex> out(points.size());
  for (std::size_t i = 0; i < points.size(); ++i)
    out[i] = evaluate_series(c.grid(), c.values(), points[i]);
  return out;
}

std::vector<double> trig_interpolate(const RealField& field, std::span<const Vec3> points) {
  const auto z = trig_interpolate(to_complex(field), points);
  std::vector<double> out(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) out[i] = z[i].real();
  return out;
}

ComplexField shift(const ComplexField& field, const Vec3& offset) {
  ComplexField c = to_fourier(field);
  const SpectralGrid& g = c.grid();
  std::array<std::vector<Complex>, kMaxDim> ph;
  for (int a = 0; a < g.dim(); ++a) {
    ph[a].resize(g.count(a));
    for (int i = 0; i < g.count(a); ++i)
      ph[a][i] = g.is_nyquist(a, i) ? Complex(nyquist_shift_factor(g.nyquist_wavenumber(a), offset[a]))
                                    : std::polar(1.0, g.wavenumber(a, i) * offset[a]);
  }
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Index3 idx = g.unravel(i);
    for (int a = 0; a < g.dim(); ++a) c[i] *= ph[a][idx[a]];
  }
  return inverse_transform(std::move(c));
}

RealField shift(const RealField& field, const Vec3& offset) {
  return real_part(shift(to_complex(field), offset));
}

ComplexField upsample2(const ComplexField& field) {
  const ComplexField c = to_fourier(field);
  const SpectralGrid& g = c.grid();
  std::array<double, kMaxDim> lengths{};
  std::array<int, kMaxDim> counts{};
  for (int a = 0; a < g.dim(); ++a) {
    lengths[a] = g.length(a);
    counts[a] = 2 * g.count(a);
  }
  const SpectralGrid fine(g.dim(), std::span(lengths.data(), g.dim()), std::span(counts.data(), g.dim()));
  ComplexField out(fine, Representation::fourier);
  for (std::size_t i = 0; i < fine.size(); ++i) {
    const Index3 fidx = fine.unravel(i);
    Index3 src{0, 0, 0};
    double factor = 1.0;
    bool inside = true;
    for (int a = 0; a < g.dim(); ++a) {
      const int k = fine.mode_index(a, fidx[a]);
      const int half = g.count(a) / 2;
      if (std::abs(k) < half) {
        src[a] = k >= 0 ? k : k + g.count(a);
      } else if (std::abs(k) == half) {
        src[a] = half;
        factor *= 0.5;
      } else {
        inside = false;
        break;
      }
    }
    if (inside) out[i] = factor * c[g.ravel(src)];
  }
  return inverse_transform(std::move(out));
}

double l2_norm(const ComplexField& field) {
  if (field.representation() != Representation::physical)
    throw std::invalid_argument("l2_norm expects a physical-space field");
  double s = 0.0;
  for (const auto& z : field.values()) s += std::norm(z);
  return std::sqrt(s * field.grid().cell_volume());
}

double integrate(const RealField& field) {
  double s = 0.0;
  for (double v : field.values()) s += v;
  return s * field.grid().cell_volume();
}

Complex inner_product(const ComplexField& a, const ComplexField& b) {
  if (!(a.grid() == b.grid())) throw std::invalid_argument("inner_product on different grids");
  Complex s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s * a.grid().cell_volume();
}

}  // namespace sclim
