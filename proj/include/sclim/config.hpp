#pragma once

// Strict-schema run configuration. Unknown keys, wrong types and violated
// invariants are ConfigError.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sclim/diagnostics.hpp"
#include "sclim/field_solver.hpp"
#include "sclim/hartree.hpp"
#include "sclim/profile.hpp"
#include "sclim/wigner.hpp"

namespace sclim {

struct RunConfig {
  int dimension = 1;
  std::vector<double> length;      // per axis
  std::vector<int> x_points;       // Vlasov x grid; floor for the Hartree grids
  std::vector<int> xi_points;      // Vlasov xi grid
  std::vector<double> xi_max;
  int kappa = 1;
  Kernel kernel = Kernel::coulomb();
  bool coupling = true;
  std::vector<double> epsilons;    // strictly decreasing, in (0, 1)
  double hartree_dt_factor = 1.0 / 16.0;  // dt = factor * eps
  double dt_cap_factor = 1.0 / 8.0;
  double vlasov_dt = 1.0 / 64.0;
  double final_time = 1.0;
  std::vector<double> sample_times;
  PhaseSpaceProfile profile;
  std::vector<TestFunction> test_functions;  // resolved: defaults filled in
  bool default_test_functions = true;
  InitOptions init;
  std::optional<AssumptionConstants> constants;
  double max_boundary_loss = 1e-4;
  bool reference_check = true;
  bool snapshots = true;
  std::string output_dir = "out";
  std::uint64_t seed = 0;
};

RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::filesystem::path& path);
/// Canonical JSON form (defaults made explicit); parse_config(to_json(c)) == c.
nlohmann::json to_json(const RunConfig& config);
/// FNV-1a 64 of the canonical JSON dump, as 16 hex digits.
std::string config_hash(const RunConfig& config);

/// 3 x 3 phase-space Gaussians at mean +- 1 std of f0 (first axis pair),
/// widths 1/4 of a three-std support radius.
std::vector<TestFunction> default_test_functions(const PhaseSpaceProfile& f0);

/// Hartree grid for eps: the configured x grid, refined in powers of two until
/// the orbital spectrum (|xi| <= max_c |xi_c| + 6 sigma_c, scaled by 1/eps) sits
/// below half the Nyquist wavenumber.
SpectralGrid hartree_grid(const RunConfig& config, double eps);
/// Dual xi axes of the Hartree grid, refined by the smallest power of two that
/// resolves every test function.
XiAxes hartree_xi_axes(const RunConfig& config, const SpectralGrid& grid, double eps);
SpectralGrid vlasov_grid(const RunConfig& config);
XiAxes vlasov_axes(const RunConfig& config);

}  // namespace sclim
