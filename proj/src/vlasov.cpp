#include "sclim/vlasov.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "detail/parallel.hpp"
#include "sclim/errors.hpp"

namespace sclim {

namespace {

// Cubic B-spline coefficients of the zero-extended sequence; c has n + 4
// entries holding indices -1 .. n + 2.
void spline_coefficients(const double* f, int n, std::ptrdiff_t stride, std::vector<double>& c) {
  const double z = std::sqrt(3.0) - 2.0;
  c.assign(n + 4, 0.0);
  double* cp = c.data() + 1;
  double prev = 0.0;
  for (int k = 0; k < n; ++k) {
    prev = f[k * stride] + z * prev;
    cp[k] = prev;
  }
  cp[n - 1] = z / (z * z - 1.0) * cp[n - 1];
  for (int k = n - 2; k >= 0; --k) cp[k] = z * (cp[k + 1] - cp[k]);
  for (int k = 0; k < n; ++k) cp[k] *= 6.0;
  cp[-1] = z * cp[0];
  cp[n] = z * cp[n - 1];
  cp[n + 1] = z * cp[n];
}

double bspline3(double t) {
  t = std::abs(t);
  if (t < 1.0) return 2.0 / 3.0 - t * t + 0.5 * t * t * t;
  if (t < 2.0) {
    const double u = 2.0 - t;
    return u * u * u / 6.0;
  }
  return 0.0;
}

// out[i] = spline(i + s) for i in [0, n); sources outside [0, n-1] give 0.
void shift_line(const double* in, double* out, int n, std::ptrdiff_t stride, double s,
                std::vector<double>& c) {
  if (s == 0.0) {
    for (int i = 0; i < n; ++i) out[i * stride] = in[i * stride];
    return;
  }
  spline_coefficients(in, n, stride, c);
  const double* cp = c.data() + 1;
  for (int i = 0; i < n; ++i) {
    const double p = i + s;
    if (p < 0.0 || p > n - 1) {
      out[i * stride] = 0.0;
      continue;
    }
    const int k0 = static_cast<int>(std::floor(p));
    double v = 0.0;
    for (int k = k0 - 1; k <= k0 + 2; ++k) v += cp[k] * bspline3(p - k);
    out[i * stride] = v;
  }
}

}  // namespace

Vec3 relativistic_velocity(const Vec3& xi, int dim) {
  double s = 0.0;
  for (int a = 0; a < dim; ++a) s += xi[a] * xi[a];
  const double inv = 1.0 / std::sqrt(s + 1.0);
  Vec3 v{0.0, 0.0, 0.0};
  for (int a = 0; a < dim; ++a) v[a] = xi[a] * inv;
  return v;
}

VlasovState make_vlasov_state(const PhaseSpaceProfile& f0, const SpectralGrid& x_grid, const XiAxes& xi,
                              const FieldSolver& solver, bool coupling) {
  if (f0.dim() != x_grid.dim()) throw ConfigError("profile and grid dimensions differ");
  VlasovState s{WignerGrid(x_grid, xi, 0.0), RealField(x_grid), solver.kappa(), 0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < s.f.x_size(); ++i) {
    const Vec3 x = x_grid.point(i);
    for (std::size_t k = 0; k < s.f.xi_size(); ++k) s.f.at(i, k) = f0(x, s.f.xi_point(k));
  }
  if (coupling) s.potential = solver.potential(marginal_density(s.f));
  return s;
}

WignerGrid transport_x(const WignerGrid& f, double tau) {
  if (tau == 0.0) return f;
  const SpectralGrid& g = f.x_grid();
  const int d = g.dim();
  const auto shape = f.shape();
  std::vector<Complex> data(f.values().begin(), f.values().end());
  fft::transform_axes(data, shape, 0, d, -1);
  const double norm = 1.0 / static_cast<double>(g.size());
  std::vector<Vec3> disp(f.xi_size());
  for (std::size_t k = 0; k < f.xi_size(); ++k) {
    disp[k] = relativistic_velocity(f.xi_point(k), d);
    for (int a = 0; a < d; ++a) disp[k][a] *= -tau;
  }
  detail::parallel_for(g.size(), [&](std::size_t iq) {
    const Index3 qi = g.unravel(iq);
    Complex* row = &data[iq * f.xi_size()];
    for (std::size_t k = 0; k < f.xi_size(); ++k) {
      Complex m = norm;
      for (int a = 0; a < d; ++a)
        m *= g.is_nyquist(a, qi[a]) ? Complex(nyquist_shift_factor(g.nyquist_wavenumber(a), disp[k][a]))
                                    : std::polar(1.0, g.wavenumber(a, qi[a]) * disp[k][a]);
      row[k] *= m;
    }
  });
  fft::transform_axes(data, shape, 0, d, +1);
  WignerGrid out = f;
  for (std::size_t i = 0; i < data.size(); ++i) out.values()[i] = data[i].real();
  return out;
}

WignerGrid kick_xi(const WignerGrid& f, const std::vector<RealField>& grad_v, double tau, double* lost_mass) {
  const int d = f.dim();
  if (static_cast<int>(grad_v.size()) != d) throw std::invalid_argument("one gradient component per axis");
  for (const auto& gv : grad_v)
    if (!(gv.grid() == f.x_grid())) throw std::invalid_argument("gradient and Wigner grids differ");
  WignerGrid out = f;
  std::array<std::ptrdiff_t, kMaxDim> stride{1, 1, 1};
  for (int a = d - 2; a >= 0; --a) stride[a] = stride[a + 1] * f.xi_axis(a + 1).count;
  detail::parallel_for(f.x_size(), [&](std::size_t ix) {
    std::vector<double> c, tmp(f.xi_size());
    double* col = &out.at(ix, 0);
    for (int a = 0; a < d; ++a) {
      const double s = tau * grad_v[a][ix] / f.xi_axis(a).spacing();
      if (s == 0.0) continue;
      const int n = f.xi_axis(a).count;
      std::copy(col, col + f.xi_size(), tmp.begin());
      // every line along axis a: fixed indices on the other axes
      for (std::size_t start = 0; start < f.xi_size(); ++start) {
        if ((start / stride[a]) % n != 0) continue;
        shift_line(tmp.data() + start, col + start, n, stride[a], s, c);
      }
    }
  });
  if (lost_mass) *lost_mass = f.integral() - out.integral();
  return out;
}

VlasovState vlasov_strang_step(VlasovState state, const VlasovParams& params, const FieldSolver& solver,
                               double initial_mass) {
  if (!(params.dt > 0.0)) throw std::invalid_argument("time step must be positive");
  state.f = transport_x(state.f, 0.5 * params.dt);
  if (params.coupling) {
    state.potential = solver.potential(marginal_density(state.f));
    const auto grad = grad_potential(state.potential);
    double gmax = 0.0;
    for (int a = 0; a < state.f.dim(); ++a)
      for (double v : grad[a].values()) gmax = std::max(gmax, std::abs(v) / state.f.xi_axis(a).spacing());
    state.max_kick_cells = std::max(state.max_kick_cells, gmax * params.dt);
    double lost = 0.0;
    state.f = kick_xi(state.f, grad, params.dt, &lost);
    state.lost_mass += lost;
    if (initial_mass > 0.0 && std::abs(state.lost_mass) > params.max_boundary_loss * initial_mass)
      throw NumericalError("Vlasov boundary mass loss exceeds the configured limit");
  }
  state.f = transport_x(state.f, 0.5 * params.dt);
  state.time += params.dt;
  return state;
}

VlasovEnergies vlasov_energies(const VlasovState& state, const FieldSolver& solver, bool coupling) {
  VlasovEnergies e;
  const WignerGrid& f = state.f;
  const int d = f.dim();
  double kin = 0.0, fmin = 0.0, fmax = 0.0;
  std::vector<double> speed(f.xi_size());
  for (std::size_t k = 0; k < f.xi_size(); ++k) {
    const Vec3 xi = f.xi_point(k);
    double s = 0.0;
    for (int a = 0; a < d; ++a) s += xi[a] * xi[a];
    speed[k] = std::sqrt(s + 1.0);
  }
  for (std::size_t i = 0; i < f.x_size(); ++i)
    for (std::size_t k = 0; k < f.xi_size(); ++k) {
      const double v = f.at(i, k);
      kin += speed[k] * v;
      fmin = std::min(fmin, v);
      fmax = std::max(fmax, v);
    }
  e.mass = f.integral();
  e.l2 = f.l2_norm();
  e.kinetic = kin * f.cell_volume();
  e.min_over_max = fmax > 0.0 ? fmin / fmax : 0.0;
  if (coupling) {
    const RealField n = marginal_density(f);
    const RealField v = solver.potential(n);
    const RealField src = solver.source(n);
    double p = 0.0;
    for (std::size_t i = 0; i < src.size(); ++i) p += v[i] * src[i];
    e.potential = 0.5 * p * f.x_grid().cell_volume();
  }
  return e;
}

}  // namespace sclim
