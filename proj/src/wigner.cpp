#include "sclim/wigner.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "detail/parallel.hpp"
#include "sclim/field_io.hpp"
#include "sclim/field_solver.hpp"

namespace sclim {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double dot(const Vec3& a, const Vec3& b, int d) {
  double s = 0.0;
  for (int i = 0; i < d; ++i) s += a[i] * b[i];
  return s;
}

bool close(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b)); }

// Oversampling factor P if the axes are dual axes refined by P (same range,
// P N points per axis, P a power of two), else 0.
int dual_oversampling(const XiAxes& axes, const XiAxes& dual, int d) {
  int factor = 0;
  for (int a = 0; a < d; ++a) {
    if (!close(axes[a].max, dual[a].max) || axes[a].count % dual[a].count != 0) return 0;
    const int p = axes[a].count / dual[a].count;
    if ((p & (p - 1)) != 0 || (factor != 0 && p != factor)) return 0;
    factor = p;
  }
  return factor;
}

int wrap_index(int i, int n) { return ((i % n) + n) % n; }

// out[o][i][r] = sum_p mat[i][p] * in[o][p][r]
std::vector<Complex> contract_axis(const std::vector<Complex>& in, std::size_t outer, std::size_t len_in,
                                   std::size_t inner, const std::vector<Complex>& mat, std::size_t len_out) {
  std::vector<Complex> out(outer * len_out * inner);
  detail::parallel_for(outer, [&](std::size_t o) {
    for (std::size_t i = 0; i < len_out; ++i) {
      Complex* dst = &out[(o * len_out + i) * inner];
      for (std::size_t p = 0; p < len_in; ++p) {
        const Complex c = mat[i * len_in + p];
        const Complex* src = &in[(o * len_in + p) * inner];
        for (std::size_t r = 0; r < inner; ++r) dst[r] += c * src[r];
      }
    }
  });
  return out;
}

}  // namespace

WignerGrid::WignerGrid(SpectralGrid x_grid, const XiAxes& xi, double eps)
    : x_grid_(std::move(x_grid)), xi_(xi), eps_(eps) {
  if (!(eps >= 0.0 && eps < 1.0)) throw std::invalid_argument("Wigner epsilon must lie in [0, 1)");
  xi_size_ = 1;
  for (int a = 0; a < x_grid_.dim(); ++a) {
    if (xi_[a].count < 2 || !(xi_[a].max > 0.0))
      throw std::invalid_argument("xi axis needs at least two points and a positive range");
    xi_size_ *= static_cast<std::size_t>(xi_[a].count);
  }
  for (int a = x_grid_.dim(); a < kMaxDim; ++a) xi_[a] = XiAxis{1, 0.5};
  values_.assign(x_grid_.size() * xi_size_, 0.0);
}

XiAxes WignerGrid::dual_axes(const SpectralGrid& g, double eps, int oversample) {
  if (!(eps > 0.0)) throw std::invalid_argument("dual xi axes need eps > 0");
  if (oversample < 1 || (oversample & (oversample - 1)) != 0)
    throw std::invalid_argument("xi oversampling must be a power of two");
  XiAxes axes{};
  for (int a = 0; a < g.dim(); ++a)
    axes[a] = XiAxis{oversample * g.count(a), std::numbers::pi * eps * g.count(a) / g.length(a)};
  for (int a = g.dim(); a < kMaxDim; ++a) axes[a] = XiAxis{1, 0.5};
  return axes;
}

std::vector<int> WignerGrid::shape() const {
  std::vector<int> s = x_grid_.shape();
  for (int a = 0; a < dim(); ++a) s.push_back(xi_[a].count);
  return s;
}

Index3 WignerGrid::xi_unravel(std::size_t flat) const noexcept {
  Index3 idx{0, 0, 0};
  for (int a = dim() - 1; a >= 0; --a) {
    idx[a] = static_cast<int>(flat % xi_[a].count);
    flat /= xi_[a].count;
  }
  return idx;
}

Vec3 WignerGrid::xi_point(std::size_t flat) const noexcept {
  const Index3 idx = xi_unravel(flat);
  Vec3 p{0.0, 0.0, 0.0};
  for (int a = 0; a < dim(); ++a) p[a] = xi_[a].value(idx[a]);
  return p;
}

double WignerGrid::xi_cell_volume() const noexcept {
  double v = 1.0;
  for (int a = 0; a < dim(); ++a) v *= xi_[a].spacing();
  return v;
}

bool WignerGrid::same_layout(const WignerGrid& o) const noexcept {
  return x_grid_ == o.x_grid_ && xi_ == o.xi_;
}

double WignerGrid::integral() const noexcept {
  double s = 0.0;
  for (double v : values_) s += v;
  return s * cell_volume();
}

double WignerGrid::l2_norm() const noexcept {
  double s = 0.0;
  for (double v : values_) s += v * v;
  return std::sqrt(s * cell_volume());
}

WignerGrid wigner_transform(const MixedState& state, const WignerOptions& options, WignerReport* report) {
  const SpectralGrid& g = state.grid();
  const int d = g.dim();
  const double eps = state.epsilon;
  const XiAxes dual = WignerGrid::dual_axes(g, eps);
  const XiAxes axes = options.xi.value_or(dual);
  WignerGrid out(g, axes, eps);
  if (report) *report = WignerReport{};
  if (state.count() == 0) return out;

  // Refined orbitals, stored point-major so the orbital sum is contiguous.
  const std::size_t nj = state.count();
  std::vector<ComplexField> fine(nj);
  detail::parallel_for(nj, [&](std::size_t j) { fine[j] = upsample2(state.orbitals[j]); });
  const SpectralGrid& fg = fine[0].grid();
  std::vector<Complex> u(fg.size() * nj), lu(fg.size() * nj);
  for (std::size_t j = 0; j < nj; ++j)
    for (std::size_t p = 0; p < fg.size(); ++p) {
      u[p * nj + j] = fine[j][p];
      lu[p * nj + j] = state.weights[j] * fine[j][p];
    }
  fine.clear();

  // R(x_n, y_m) with trapezoid weights, m_a in [-N_a/2, N_a/2].
  std::array<int, kMaxDim> mcount{1, 1, 1};
  std::size_t mtotal = 1;
  for (int a = 0; a < d; ++a) {
    mcount[a] = g.count(a) + 1;
    mtotal *= mcount[a];
  }
  std::vector<Complex> r(g.size() * mtotal);
  detail::parallel_for(g.size(), [&](std::size_t n) {
    const Index3 ni = g.unravel(n);
    for (std::size_t fm = (mtotal - 1) / 2; fm < mtotal; ++fm) {
      std::size_t rem = fm;
      std::size_t ia = 0, ib = 0;
      double w = 1.0;
      std::array<int, kMaxDim> p{0, 0, 0};
      for (int a = d - 1; a >= 0; --a) {
        p[a] = static_cast<int>(rem % mcount[a]);
        rem /= mcount[a];
      }
      for (int a = 0; a < d; ++a) {
        const int n2 = 2 * g.count(a);
        const int m = p[a] - g.count(a) / 2;
        if (p[a] == 0 || p[a] == g.count(a)) w *= 0.5;
        ia = ia * n2 + wrap_index(2 * ni[a] + m, n2);
        ib = ib * n2 + wrap_index(2 * ni[a] - m, n2);
      }
      const Complex* pa = &lu[ia * nj];
      const Complex* pb = &u[ib * nj];
      Complex s = 0.0;
      for (std::size_t j = 0; j < nj; ++j) s += pa[j] * std::conj(pb[j]);
      s *= w;
      r[n * mtotal + fm] = s;
      r[n * mtotal + (mtotal - 1 - fm)] = std::conj(s);
    }
  });

  double scale = 1.0;
  for (int a = 0; a < d; ++a) scale *= g.spacing(a) / eps / kTwoPi;

  std::vector<Complex> result;
  if (const int over = dual_oversampling(axes, dual, d); over > 0) {
    // y slots of period P N per axis. For P = 1 the ends y = +-L/(2 eps) share a
    // slot (their phases coincide on that grid); for P > 1 they stay apart and the
    // padding zeros make the FFT sample the same windowed transform P times finer.
    std::array<int, kMaxDim> ycount{1, 1, 1};
    std::size_t ny = 1;
    for (int a = 0; a < d; ++a) {
      ycount[a] = over * g.count(a);
      ny *= ycount[a];
    }
    std::vector<Complex> folded(g.size() * ny);
    for (std::size_t n = 0; n < g.size(); ++n)
      for (std::size_t fm = 0; fm < mtotal; ++fm) {
        std::size_t rem = fm, slot = 0;
        std::array<int, kMaxDim> p{0, 0, 0};
        for (int a = d - 1; a >= 0; --a) {
          p[a] = static_cast<int>(rem % mcount[a]);
          rem /= mcount[a];
        }
        for (int a = 0; a < d; ++a)
          slot = slot * ycount[a] + wrap_index(p[a] - g.count(a) / 2, ycount[a]);
        folded[n * ny + slot] += r[n * mtotal + fm];
      }
    r.clear();
    std::vector<int> shape = g.shape();
    for (int a = 0; a < d; ++a) shape.push_back(ycount[a]);
    fft::transform_axes(folded, shape, d, d, -1);
    // FFT index k corresponds to xi index i = k + P N/2 (mod P N).
    result.assign(folded.size(), 0.0);
    for (std::size_t n = 0; n < g.size(); ++n)
      for (std::size_t k = 0; k < ny; ++k) {
        std::size_t rem = k, dst = 0;
        std::array<int, kMaxDim> ki{0, 0, 0};
        for (int a = d - 1; a >= 0; --a) {
          ki[a] = static_cast<int>(rem % ycount[a]);
          rem /= ycount[a];
        }
        for (int a = 0; a < d; ++a) dst = dst * ycount[a] + (ki[a] + ycount[a] / 2) % ycount[a];
        result[n * ny + dst] = folded[n * ny + k];
      }
  } else {
    result = std::move(r);
    std::size_t outer = g.size();
    for (int a = 0; a < d; ++a) {
      std::size_t inner = 1;
      for (int b = a + 1; b < d; ++b) inner *= mcount[b];
      const int nxi = axes[a].count;
      const double dy = g.spacing(a) / eps;
      std::vector<Complex> mat(static_cast<std::size_t>(nxi) * mcount[a]);
      for (int i = 0; i < nxi; ++i)
        for (int p = 0; p < mcount[a]; ++p)
          mat[i * mcount[a] + p] = std::polar(1.0, -axes[a].value(i) * (p - g.count(a) / 2) * dy);
      result = contract_axis(result, outer, mcount[a], inner, mat, nxi);
      outer *= nxi;
    }
  }

  double imag = 0.0, fmax = 0.0;
  auto vals = out.values();
  for (std::size_t i = 0; i < vals.size(); ++i) {
    const Complex z = scale * result[i];
    vals[i] = z.real();
    imag = std::max(imag, std::abs(z.imag()));
    fmax = std::max(fmax, std::abs(z.real()));
  }
  if (report) {
    double edge = 0.0, total = 0.0;
    for (std::size_t n = 0; n < out.x_size(); ++n)
      for (std::size_t k = 0; k < out.xi_size(); ++k) {
        const Index3 ki = out.xi_unravel(k);
        const double v = std::abs(out.at(n, k));
        total += v;
        for (int a = 0; a < d; ++a)
          if (ki[a] == 0 || ki[a] == axes[a].count - 1) {
            edge += v;
            break;
          }
      }
    report->imaginary_residue = fmax > 0.0 ? imag / fmax : imag;
    report->boundary_fraction = total > 0.0 ? edge / total : 0.0;
    report->xi_range_ok = report->boundary_fraction <= options.boundary_tolerance;
  }
  return out;
}

RealField marginal_density(const WignerGrid& f) {
  RealField n(f.x_grid());
  const double w = f.xi_cell_volume();
  for (std::size_t i = 0; i < f.x_size(); ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < f.xi_size(); ++k) s += f.at(i, k);
    n[i] = s * w;
  }
  return n;
}

Vec3 gamma_symbol(double eps, const Vec3& y, const Vec3& xi, int dim) {
  double p2 = 0.0, m2 = 0.0;
  for (int a = 0; a < dim; ++a) {
    const double p = xi[a] + 0.5 * eps * y[a];
    const double m = xi[a] - 0.5 * eps * y[a];
    p2 += p * p;
    m2 += m * m;
  }
  const double denom = std::sqrt(p2 + 1.0) + std::sqrt(m2 + 1.0);
  Vec3 g{0.0, 0.0, 0.0};
  for (int a = 0; a < dim; ++a) g[a] = 2.0 * xi[a] / denom;
  return g;
}

double delta_symbol(const RealField& v, double eps, const Vec3& x, const Vec3& eta) {
  const int d = v.grid().dim();
  if (eps == 0.0) {
    const auto grad = grad_potential(v);
    const Vec3 pts[1] = {x};
    double s = 0.0;
    for (int a = 0; a < d; ++a) s += eta[a] * trig_interpolate(grad[a], pts)[0];
    return s;
  }
  Vec3 pts[2] = {x, x};
  for (int a = 0; a < d; ++a) {
    pts[0][a] += 0.5 * eps * eta[a];
    pts[1][a] -= 0.5 * eps * eta[a];
  }
  const auto vals = trig_interpolate(v, pts);
  return (vals[0] - vals[1]) / eps;
}

WignerGrid apply_gamma(const WignerGrid& f, double eps) {
  const SpectralGrid& g = f.x_grid();
  const int d = g.dim();
  const auto shape = f.shape();
  std::vector<Complex> data(f.values().begin(), f.values().end());
  fft::transform_axes(data, shape, 0, d, -1);
  const double norm = 1.0 / static_cast<double>(g.size());
  for (std::size_t ix = 0; ix < g.size(); ++ix) {
    Complex* row = &data[ix * f.xi_size()];
    if (g.touches_nyquist(ix)) {
      std::fill(row, row + f.xi_size(), Complex(0.0));
      continue;
    }
    const Vec3 q = g.wavevector(ix);
    for (std::size_t k = 0; k < f.xi_size(); ++k) {
      const Vec3 gam = gamma_symbol(eps, q, f.xi_point(k), d);
      row[k] *= Complex(0.0, dot(q, gam, d) * norm);
    }
  }
  fft::transform_axes(data, shape, 0, d, +1);
  WignerGrid out = f;
  for (std::size_t i = 0; i < data.size(); ++i) out.values()[i] = data[i].real();
  return out;
}

namespace {

// delta(x, eta_k) for every x and every eta of the xi-FFT, [x][k] layout.
std::vector<double> delta_table(const WignerGrid& f, const RealField& v, double eps) {
  const SpectralGrid& g = f.x_grid();
  const int d = g.dim();
  const std::size_t nk = f.xi_size();
  std::vector<double> table(g.size() * nk, 0.0);
  std::vector<RealField> grad;
  std::vector<Complex> vhat;
  if (eps == 0.0) {
    grad = grad_potential(v);
  } else {
    vhat.assign(v.values().begin(), v.values().end());
    fft::transform_axes(vhat, g.shape(), 0, d, -1);
  }
  const double norm = 1.0 / static_cast<double>(g.size());
  detail::parallel_for(nk, [&](std::size_t k) {
    const Index3 ki = f.xi_unravel(k);
    Vec3 eta{0.0, 0.0, 0.0};
    for (int a = 0; a < d; ++a) {
      const int n = f.xi_axis(a).count;
      if (ki[a] == n / 2) return;  // Nyquist in eta
      const int mode = ki[a] < n / 2 ? ki[a] : ki[a] - n;
      eta[a] = kTwoPi * mode / (n * f.xi_axis(a).spacing());
    }
    if (eps == 0.0) {
      for (std::size_t ix = 0; ix < g.size(); ++ix) {
        double s = 0.0;
        for (int a = 0; a < d; ++a) s += eta[a] * grad[a][ix];
        table[ix * nk + k] = s;
      }
      return;
    }
    std::vector<Complex> diff(g.size());
    for (std::size_t iq = 0; iq < g.size(); ++iq) {
      const Index3 qi = g.unravel(iq);
      Complex plus = 1.0, minus = 1.0;
      for (int a = 0; a < d; ++a) {
        const double s = 0.5 * eps * eta[a];
        if (g.is_nyquist(a, qi[a])) {
          const double c = nyquist_shift_factor(g.nyquist_wavenumber(a), s);
          plus *= c;
          minus *= c;
        } else {
          const double q = g.wavenumber(a, qi[a]);
          plus *= std::polar(1.0, q * s);
          minus *= std::polar(1.0, -q * s);
        }
      }
      diff[iq] = vhat[iq] * (plus - minus);
    }
    fft::transform_axes(diff, g.shape(), 0, d, +1);
    for (std::size_t ix = 0; ix < g.size(); ++ix) table[ix * nk + k] = diff[ix].real() * norm / eps;
  });
  return table;
}

}  // namespace

WignerGrid apply_theta(const WignerGrid& f, const RealField& v, double eps) {
  if (!(v.grid() == f.x_grid())) throw std::invalid_argument("potential and Wigner grids differ");
  const int d = f.dim();
  const auto shape = f.shape();
  const std::vector<double> table = delta_table(f, v, eps);
  std::vector<Complex> data(f.values().begin(), f.values().end());
  fft::transform_axes(data, shape, d, d, -1);
  const double norm = 1.0 / static_cast<double>(f.xi_size());
  for (std::size_t i = 0; i < data.size(); ++i) data[i] *= Complex(0.0, -table[i] * norm);
  fft::transform_axes(data, shape, d, d, +1);
  WignerGrid out = f;
  for (std::size_t i = 0; i < data.size(); ++i) out.values()[i] = data[i].real();
  return out;
}

double TestFunction::operator()(const Vec3& x, const Vec3& xi, const SpectralGrid& torus) const noexcept {
  double e = 0.0;
  for (int a = 0; a < torus.dim(); ++a) {
    const double l = torus.length(a);
    double u = x[a] - x_center[a];
    u -= l * std::floor(u / l + 0.5);
    const double w = xi[a] - xi_center[a];
    e += u * u / (2.0 * x_width[a] * x_width[a]) + w * w / (2.0 * xi_width[a] * xi_width[a]);
  }
  return std::exp(-e);
}

double weak_pairing(const WignerGrid& f, const TestFunction& phi) {
  const SpectralGrid& g = f.x_grid();
  const int d = g.dim();
  for (int a = 0; a < d; ++a) {
    if (phi.x_width[a] < 2.0 * g.spacing(a) || phi.xi_width[a] < 2.0 * f.xi_axis(a).spacing())
      throw std::invalid_argument("test function narrower than two grid spacings");
    const double lo = phi.xi_center[a] + f.xi_axis(a).max;
    const double hi = f.xi_axis(a).max - phi.xi_center[a];
    const double gap = std::min(lo, hi);
    if (gap <= 0.0 || std::exp(-gap * gap / (2.0 * phi.xi_width[a] * phi.xi_width[a])) > 1e-12)
      throw std::invalid_argument("test function tails exceed 1e-12 at the xi boundary");
  }
  std::vector<double> px(g.size()), pxi(f.xi_size());
  const Vec3 zero{0.0, 0.0, 0.0};
  TestFunction xs = phi, ks = phi;
  xs.xi_center = zero;
  ks.x_center = zero;
  for (std::size_t i = 0; i < g.size(); ++i) px[i] = xs(g.point(i), zero, g);
  for (std::size_t k = 0; k < f.xi_size(); ++k) pxi[k] = ks(zero, f.xi_point(k), g);
  double s = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    double row = 0.0;
    for (std::size_t k = 0; k < f.xi_size(); ++k) row += f.at(i, k) * pxi[k];
    s += px[i] * row;
  }
  return s * f.cell_volume();
}

std::vector<double> weak_pairings(const WignerGrid& f, std::span<const TestFunction> phis) {
  std::vector<double> out;
  out.reserve(phis.size());
  for (const auto& p : phis) out.push_back(weak_pairing(f, p));
  return out;
}

ResidualReport evolution_residual(const WignerGrid& f_prev, const WignerGrid& f_now,
                                  const WignerGrid& f_next, const RealField& v, double dt,
                                  std::span<const TestFunction> phis) {
  if (f_prev.epsilon() != f_now.epsilon() || f_next.epsilon() != f_now.epsilon())
    throw std::invalid_argument("snapshots carry different epsilon tags");
  if (!f_prev.same_layout(f_now) || !f_next.same_layout(f_now))
    throw std::invalid_argument("snapshots live on different phase-space grids");
  if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
  const double eps = f_now.epsilon();
  WignerGrid dfdt = f_now;
  for (std::size_t i = 0; i < dfdt.size(); ++i)
    dfdt.values()[i] = (f_next.values()[i] - f_prev.values()[i]) / (2.0 * dt);
  const WignerGrid gam = apply_gamma(f_now, eps);
  const WignerGrid the = apply_theta(f_now, v, eps);
  ResidualReport rep;
  for (const auto& phi : phis) {
    const double res = -weak_pairing(dfdt, phi) - weak_pairing(gam, phi) - weak_pairing(the, phi);
    rep.per_function.push_back(res);
    rep.max_abs = std::max(rep.max_abs, std::abs(res));
  }
  return rep;
}

void write_wigner(const std::filesystem::path& stem, const WignerGrid& f) {
  nlohmann::json m;
  m["kind"] = "wigner";
  m["dimension"] = f.dim();
  m["epsilon"] = f.epsilon();
  m["representation"] = "physical";
  m["units"] = "dimensionless";
  nlohmann::json axes = nlohmann::json::array();
  for (int a = 0; a < f.dim(); ++a)
    axes.push_back({{"name", "x" + std::to_string(a)},
                    {"count", f.x_grid().count(a)},
                    {"min", f.x_grid().origin(a)},
                    {"spacing", f.x_grid().spacing(a)},
                    {"periodic", true}});
  for (int a = 0; a < f.dim(); ++a)
    axes.push_back({{"name", "xi" + std::to_string(a)},
                    {"count", f.xi_axis(a).count},
                    {"min", -f.xi_axis(a).max},
                    {"spacing", f.xi_axis(a).spacing()},
                    {"periodic", false}});
  m["axes"] = axes;
  io::write_array(stem, f.values(), m);
}

}  // namespace sclim
