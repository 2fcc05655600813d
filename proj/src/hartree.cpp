#include "sclim/hartree.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

#include "detail/parallel.hpp"
#include "sclim/errors.hpp"
#include "sclim/field_io.hpp"

namespace sclim {

namespace {

Eigen::MatrixXcd orbital_matrix(const std::vector<ComplexField>& orbitals, std::size_t points) {
  Eigen::MatrixXcd m(points, orbitals.size());
  for (std::size_t j = 0; j < orbitals.size(); ++j)
    for (std::size_t i = 0; i < points; ++i) m(i, j) = orbitals[j][i];
  return m;
}

std::vector<ComplexField> orbitals_from_matrix(const Eigen::MatrixXcd& m, const SpectralGrid& grid) {
  std::vector<ComplexField> out;
  out.reserve(m.cols());
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    std::vector<Complex> v(m.rows());
    for (Eigen::Index i = 0; i < m.rows(); ++i) v[i] = m(i, j);
    out.emplace_back(grid, std::move(v));
  }
  return out;
}

std::vector<double> axis_lattice(double lo, double hi, double h) {
  const int n = std::max(1, static_cast<int>(std::ceil((hi - lo) / h)));
  const double mid = 0.5 * (lo + hi);
  std::vector<double> pts(n);
  for (int i = 0; i < n; ++i) pts[i] = mid + (i - 0.5 * (n - 1)) * h;
  return pts;
}

double wrap(double u, double length) {
  return u - length * std::floor(u / length + 0.5);
}

}  // namespace

MixedState::MixedState(double eps, std::vector<double> w, std::vector<ComplexField> orbs,
                       SpectralGrid grid)
    : epsilon(eps), weights(std::move(w)), orbitals(std::move(orbs)), grid_(std::move(grid)) {
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("epsilon must lie in (0, 1)");
  if (weights.size() != orbitals.size())
    throw std::invalid_argument("one weight per orbital required");
  for (double l : weights)
    if (!(l >= 0.0) || !std::isfinite(l)) throw std::invalid_argument("weights must be non-negative");
  for (const auto& o : orbitals) {
    if (!(o.grid() == grid_)) throw std::invalid_argument("orbitals must share the state grid");
    if (o.representation() != Representation::physical)
      throw std::invalid_argument("orbitals must be in the physical representation");
  }
}

double MixedState::trace() const noexcept {
  double s = 0.0;
  for (double l : weights) s += l;
  return s;
}

double MixedState::trace_squared() const noexcept {
  double s = 0.0;
  for (double l : weights) s += l * l;
  return s;
}

double MixedState::gram_deviation() const {
  if (orbitals.empty()) return 0.0;
  const Eigen::MatrixXcd psi = orbital_matrix(orbitals, grid_.size());
  Eigen::MatrixXcd g = psi.adjoint() * psi * grid_.cell_volume();
  g -= Eigen::MatrixXcd::Identity(g.rows(), g.cols());
  return g.cwiseAbs().maxCoeff();
}

void HartreeParams::validate(double eps) const {
  if (kappa != 1 && kappa != -1) throw ConfigError("kappa must be +1 or -1");
  if (!(dt > 0.0)) throw ConfigError("time step must be positive");
  if (!(final_time >= 0.0)) throw ConfigError("final time must be non-negative");
  if (final_time > 0.0 && dt > final_time * (1.0 + 1e-12))
    throw ConfigError("time step exceeds the final time");
  if (dt > dt_cap_factor * eps * (1.0 + 1e-12))
    throw ConfigError("time step exceeds dt_cap_factor * epsilon");
  if (kernel.type == KernelType::yukawa && !(kernel.screening > 0.0))
    throw ConfigError("Yukawa screening length must be positive");
}

ComplexField coherent_state(const SpectralGrid& grid, double eps, const Vec3& xc, const Vec3& xic) {
  const int d = grid.dim();
  const double norm = std::pow(std::numbers::pi * eps, -0.25 * d);
  return ComplexField::from_function(grid, [&](const Vec3& x) {
    double re = 0.0, ph = 0.0;
    for (int a = 0; a < d; ++a) {
      const double u = wrap(x[a] - xc[a], grid.length(a));
      re -= u * u / (2.0 * eps);
      ph += xic[a] * u / eps;
    }
    return norm * std::exp(re) * std::polar(1.0, ph);
  });
}

MixedState init_coherent_mixture(const PhaseSpaceProfile& f0, double eps, const SpectralGrid& grid,
                                 const InitOptions& opt, InitReport* report) {
  if (!(eps > 0.0 && eps < 1.0)) throw ConfigError("epsilon must lie in (0, 1)");
  if (f0.dim() != grid.dim()) throw ConfigError("profile and grid dimensions differ");
  const double mass = f0.mass();
  if (!(mass > 0.0)) throw ConfigError("initial profile has zero mass");
  if (!(opt.lattice_factor > 0.0)) throw ConfigError("lattice_factor must be positive");
  const int d = grid.dim();
  const double h = std::sqrt(opt.lattice_factor * 2.0 * std::numbers::pi * eps);

  // Per-axis lattices: d position axes then d momentum axes.
  const PhaseBox box = f0.support(opt.support_sigmas);
  std::vector<std::vector<double>> axes;
  PhaseBox cells;
  for (int a = 0; a < d; ++a) {
    const double lo = std::max(box.x_lo[a], grid.origin(a));
    const double hi = std::min(box.x_hi[a], grid.origin(a) + grid.length(a));
    axes.push_back(axis_lattice(lo, hi, h));
    cells.x_lo[a] = axes.back().front() - 0.5 * h;
    cells.x_hi[a] = axes.back().back() + 0.5 * h;
  }
  for (int a = 0; a < d; ++a) {
    axes.push_back(axis_lattice(box.xi_lo[a], box.xi_hi[a], h));
    cells.xi_lo[a] = axes.back().front() - 0.5 * h;
    cells.xi_hi[a] = axes.back().back() + 0.5 * h;
  }
  const double uncovered = std::max(0.0, 1.0 - f0.mass_in(cells) / mass);
  if (uncovered > opt.coverage_tolerance) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "coherent-state lattice does not cover f0: uncovered mass fraction %.3e", uncovered);
    throw ConfigError(buf);
  }

  struct Site {
    Vec3 x{}, xi{};
    double f = 0.0;
  };
  std::vector<Site> sites;
  std::vector<std::size_t> idx(2 * d, 0);
  double fmax = 0.0;
  for (;;) {
    Site s;
    for (int a = 0; a < d; ++a) {
      s.x[a] = axes[a][idx[a]];
      s.xi[a] = axes[d + a][idx[d + a]];
    }
    s.f = f0(s.x, s.xi);
    fmax = std::max(fmax, s.f);
    sites.push_back(s);
    int a = 2 * d - 1;
    while (a >= 0 && ++idx[a] == axes[a].size()) idx[a--] = 0;
    if (a < 0) break;
  }
  double total = 0.0, dropped = 0.0;
  std::vector<Site> kept;
  for (const auto& s : sites) {
    total += s.f;
    if (s.f > opt.site_cutoff * fmax)
      kept.push_back(s);
    else
      dropped += s.f;
  }
  if (kept.empty() || !(total > 0.0)) throw ConfigError("initial profile has zero mass on the lattice");

  const std::size_t nc = kept.size();
  Eigen::VectorXd w(nc);
  double wsum = 0.0;
  for (std::size_t c = 0; c < nc; ++c) wsum += kept[c].f;
  for (std::size_t c = 0; c < nc; ++c) w(c) = mass * kept[c].f / wsum;

  Eigen::MatrixXcd psi(grid.size(), nc);
  for (std::size_t c = 0; c < nc; ++c) {
    const ComplexField z = coherent_state(grid, eps, kept[c].x, kept[c].xi);
    for (std::size_t i = 0; i < grid.size(); ++i) psi(i, c) = z[i];
  }
  const Eigen::MatrixXcd gram = psi.adjoint() * psi * grid.cell_volume();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> gram_eig(gram);
  if (gram_eig.info() != Eigen::Success) throw NumericalError("Gram eigendecomposition failed");
  const double min_gram = gram_eig.eigenvalues().minCoeff();

  Eigen::MatrixXcd orbitals;
  std::vector<double> lambda;
  double eigen_dropped = 0.0;
  if (opt.method == Orthonormalization::lowdin) {
    if (min_gram < opt.gram_floor) {
      char buf[160];
      std::snprintf(buf, sizeof buf,
                    "Lowdin orthonormalization failed: Gram matrix near-singular (min eigenvalue %.3e)",
                    min_gram);
      throw NumericalError(buf);
    }
    const Eigen::VectorXd inv_sqrt = gram_eig.eigenvalues().cwiseSqrt().cwiseInverse();
    const Eigen::MatrixXcd& u = gram_eig.eigenvectors();
    orbitals = psi * (u * inv_sqrt.asDiagonal() * u.adjoint());
    lambda.assign(w.data(), w.data() + nc);
  } else {
    const Eigen::VectorXd sw = w.cwiseSqrt();
    const Eigen::MatrixXcd m = sw.asDiagonal() * gram * sw.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(m);
    if (eig.info() != Eigen::Success) throw NumericalError("quadrature-operator eigendecomposition failed");
    const Eigen::VectorXd& ev = eig.eigenvalues();
    const double top = ev.maxCoeff();
    std::vector<Eigen::Index> keep;
    for (Eigen::Index k = ev.size() - 1; k >= 0; --k) {
      if (ev(k) > opt.eigen_cutoff * top)
        keep.push_back(k);
      else
        eigen_dropped += std::max(0.0, ev(k));
    }
    Eigen::MatrixXcd coef(nc, keep.size());
    for (std::size_t k = 0; k < keep.size(); ++k) {
      coef.col(k) = sw.asDiagonal() * eig.eigenvectors().col(keep[k]) / std::sqrt(ev(keep[k]));
      lambda.push_back(ev(keep[k]));
    }
    orbitals = psi * coef;
    eigen_dropped /= top > 0.0 ? ev.sum() : 1.0;
  }
  // Small retained eigenvalues amplify round-off; one Lowdin pass on the
  // near-orthonormal set restores orthonormality to machine precision.
  {
    const Eigen::MatrixXcd g2 = orbitals.adjoint() * orbitals * grid.cell_volume();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> pe(g2);
    if (pe.info() != Eigen::Success) throw NumericalError("orthonormality correction failed");
    const Eigen::VectorXd inv_sqrt = pe.eigenvalues().cwiseSqrt().cwiseInverse();
    orbitals = orbitals * (pe.eigenvectors() * inv_sqrt.asDiagonal() * pe.eigenvectors().adjoint());
  }
  double lsum = 0.0;
  for (double l : lambda) lsum += l;
  for (double& l : lambda) l *= mass / lsum;

  MixedState state(eps, std::move(lambda), orbitals_from_matrix(orbitals, grid), grid);
  if (report) {
    report->sites = nc;
    report->orbitals = state.count();
    report->lattice_spacing = h;
    report->uncovered_mass_fraction = uncovered;
    report->dropped_weight_fraction = dropped / total + eigen_dropped;
    report->min_gram_eigenvalue = min_gram;
    report->scaled_purity = state.trace_squared() / std::pow(eps, d);
    report->purity_within_bound = report->scaled_purity <= opt.purity_bound;
  }
  return state;
}

RealField density(const MixedState& state) {
  RealField n(state.grid());
  for (std::size_t j = 0; j < state.count(); ++j) {
    const double l = state.weights[j];
    const auto& o = state.orbitals[j];
    for (std::size_t i = 0; i < n.size(); ++i) n[i] += l * std::norm(o[i]);
  }
  return n;
}

MixedState kinetic_step(MixedState state, double tau) {
  if (tau == 0.0 || state.count() == 0) return state;
  const SpectralGrid& g = state.grid();
  const double eps = state.epsilon;
  std::vector<Complex> phase(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Vec3 k = g.wavevector(i);
    const double k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
    phase[i] = std::polar(1.0, -(tau / eps) * std::sqrt(eps * eps * k2 + 1.0));
  }
  detail::parallel_for(state.count(), [&](std::size_t j) {
    auto& o = state.orbitals[j];
    fft::forward(o.values(), g);
    for (std::size_t i = 0; i < g.size(); ++i) o[i] *= phase[i];
    fft::inverse(o.values(), g);
  });
  return state;
}

MixedState potential_step(MixedState state, const RealField& potential, double tau) {
  if (!(potential.grid() == state.grid())) throw std::invalid_argument("potential grid mismatch");
  std::vector<Complex> phase(potential.size());
  for (std::size_t i = 0; i < phase.size(); ++i) {
    if (!std::isfinite(potential[i])) throw std::invalid_argument("potential is not finite");
    phase[i] = std::polar(1.0, -(tau / state.epsilon) * potential[i]);
  }
  detail::parallel_for(state.count(), [&](std::size_t j) {
    auto& o = state.orbitals[j];
    for (std::size_t i = 0; i < phase.size(); ++i) o[i] *= phase[i];
  });
  return state;
}

MixedState potential_step(MixedState state, const ComplexField& potential, double tau) {
  return potential_step(std::move(state), require_real(potential), tau);
}

MixedState strang_step(MixedState state, const HartreeParams& params, const FieldSolver& solver) {
  if (!(solver.grid() == state.grid())) throw std::invalid_argument("solver and state grids differ");
  state = kinetic_step(std::move(state), 0.5 * params.dt);
  if (params.coupling && state.count() > 0)
    state = potential_step(std::move(state), solver.potential(density(state)), params.dt);
  state = kinetic_step(std::move(state), 0.5 * params.dt);
  state.time += params.dt;
  return state;
}

void write_checkpoint(const std::filesystem::path& dir, const MixedState& state, int kappa,
                      const Kernel& kernel) {
  std::filesystem::create_directories(dir);
  nlohmann::json names = nlohmann::json::array();
  for (std::size_t j = 0; j < state.count(); ++j) {
    char name[32];
    std::snprintf(name, sizeof name, "orbital_%04zu", j);
    io::write_field(dir / name, state.orbitals[j]);
    names.push_back(name);
  }
  nlohmann::json m;
  m["format"] = "sclim-checkpoint";
  m["version"] = 1;
  m["epsilon"] = state.epsilon;
  m["time"] = state.time;
  m["weights"] = state.weights;
  m["kappa"] = kappa;
  m["kernel"] = {{"type", kernel.name()}, {"screening", kernel.screening}};
  m["grid"] = io::grid_manifest(state.grid());
  m["orbitals"] = names;
  io::write_json(dir / "checkpoint.json", m);
}

Checkpoint read_checkpoint(const std::filesystem::path& dir) {
  const nlohmann::json m = io::read_json(dir / "checkpoint.json");
  try {
    if (m.at("format").get<std::string>() != "sclim-checkpoint")
      throw ConfigError("not a checkpoint manifest: " + (dir / "checkpoint.json").string());
    const SpectralGrid grid = io::grid_from_manifest(m.at("grid"));
    std::vector<ComplexField> orbitals;
    for (const auto& name : m.at("orbitals")) {
      orbitals.push_back(io::read_complex_field(dir / name.get<std::string>()));
      if (!(orbitals.back().grid() == grid)) throw ConfigError("orbital grid differs from checkpoint grid");
    }
    Checkpoint cp;
    cp.state = MixedState(m.at("epsilon").get<double>(), m.at("weights").get<std::vector<double>>(),
                          std::move(orbitals), grid);
    cp.state.time = m.at("time").get<double>();
    cp.kappa = m.at("kappa").get<int>();
    const auto& k = m.at("kernel");
    cp.kernel = k.at("type").get<std::string>() == "yukawa"
                    ? Kernel::yukawa(k.at("screening").get<double>())
                    : Kernel::coulomb();
    return cp;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed checkpoint manifest: ") + e.what());
  }
}

}  // namespace sclim
