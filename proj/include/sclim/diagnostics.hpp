#pragma once

// Conserved and bounded quantities of mixed states and their fields, and the
// numerical side of the a-priori estimates (Lieb-Thirring type ratio, Hoelder
// and Sobolev checks, smallness margin for attractive coupling).

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

#include "sclim/field_solver.hpp"
#include "sclim/hartree.hpp"

namespace sclim {

/// sum_j lambda_j sum_k sqrt(eps^2 |xi_k|^2 + 1) |psi_hat_j(k)|^2 (2 pi/L)^d.
double kinetic_energy(const MixedState& state);
/// tr |grad| rho = sum_j lambda_j sum_k |xi_k| |psi_hat_j(k)|^2 (2 pi/L)^d.
double trace_abs_gradient(const MixedState& state);

/// 1/2 int V (n - mean n) for Coulomb, 1/2 int V n for Yukawa; throws
/// std::invalid_argument if (n, V) fails the solver residual check.
double potential_energy(const RealField& density, const RealField& potential, const FieldSolver& solver);
/// Same pairing evaluated as a Fourier sum.
double potential_energy_fourier(const RealField& density, const RealField& potential,
                                const FieldSolver& solver);
double potential_energy(const MixedState& state, const FieldSolver& solver);

/// Discretized kernel rho(x_a, x_b) = sum_j lambda_j psi_j(x_a) conj(psi_j(x_b)).
Eigen::MatrixXcd density_matrix_kernel(const MixedState& state);
/// (sum |sigma|^p)^{1/p} of the operator with matrix kernel * dx^d. Throws on
/// relative asymmetry above 1e-8 or p < 1.
double schatten_norm(const Eigen::MatrixXcd& kernel, double cell_volume, double p);

struct LiebThirringExponents {
  double q = 0.0;
  double theta = 0.0;
};
/// q = (d(p-1)+p)/(d(p-1)+1), theta = p/(d(p-1)+p).
LiebThirringExponents lieb_thirring_exponents(double p, int d);
/// ||n||_q / (||rho||_{S_p}^theta (tr|grad|rho)^{1-theta}); dense kernel, N <= 512 points.
double lieb_thirring_ratio(const MixedState& state, double p);
/// |ratio(dilated) - ratio| / ratio for psi -> s^{d/2} psi(s x), evaluated on a grid refined by ceil(s).
double dilation_covariance_check(const MixedState& state, double p, double scale);

double lp_norm(const RealField& field, double p);

struct InequalityCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = true;
};
/// ||n||_{6/5} <= ||n||_1^{1/6} ||n||_{5/4}^{5/6}.
InequalityCheck holder_check(const RealField& density);
/// int int n(x) n(y)/|x-y| <= C_s ||n||_{6/5}^2 on a 3D torus (neutralized periodic kernel).
InequalityCheck sobolev_check(const RealField& density, double c_s);

struct AssumptionConstants {
  double c_s = 0.0;
  double c_2 = 0.0;
  std::string provenance;
};

struct AssumptionReport {
  double trace = 0.0;
  double scaled_purity = 0.0;        // eps^{-d} tr rho^2
  double kinetic_energy = 0.0;
  double wigner_l2 = 0.0;            // (2 pi eps)^{-d/2} (tr rho^2)^{1/2}
  std::optional<double> c_tilde;     // C_s C_2^{5/3} tr(rho)^{1/3} ||f||^{2/3}
  std::optional<double> margin;      // 8 pi - c_tilde
  std::optional<double> c_star;      // (8 pi)^3 / (C_s^3 C_2^5)
  bool zero_mass = false;
  bool blocking = false;             // margin enforced (d = 3, kappa = -1)
  bool passed = true;
  std::string note;
};

/// Throws ConfigError when kappa = -1, d = 3 and constants are missing.
AssumptionReport assumption_margins(const MixedState& state, int kappa,
                                    const std::optional<AssumptionConstants>& constants);

double grad_potential_l2(const RealField& potential);

struct DiagnosticsRecord {
  double t = 0.0;
  double trace = 0.0;
  double trace_sq = 0.0;
  double scaled_trace_sq = 0.0;
  double e_kin = 0.0;
  double e_pot = 0.0;
  double e_total = 0.0;
  double wigner_l2 = 0.0;
  double grad_v_l2 = 0.0;
  double n_l1 = 0.0;
  double n_l54 = 0.0;
  double n_l65 = 0.0;
  bool holder_ok = true;
  double margin = 0.0;  // NaN when constants are absent

  static std::string csv_header();
  std::string csv_row() const;
};

inline constexpr const char* kDiagnosticsSchema = "sclim-diagnostics/1";

/// wigner_l2 < 0 means "use the exact value from the weights".
DiagnosticsRecord make_record(const MixedState& state, const FieldSolver& solver, bool coupling,
                              const std::optional<AssumptionConstants>& constants, double wigner_l2 = -1.0);

}  // namespace sclim
