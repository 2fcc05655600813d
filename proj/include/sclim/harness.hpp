#pragma once

// Orchestration of the classical-limit experiment: Hartree runs per eps,
// one Vlasov reference run, weak pairings against a fixed test-function set,
// and the distance table D(eps, t) = max_m |<f^eps(t) - f(t), phi_m>|.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sclim/config.hpp"
#include "sclim/diagnostics.hpp"
#include "sclim/vlasov.hpp"
#include "sclim/wigner.hpp"

namespace sclim {

struct RunOptions {
  bool override_assumption_b = false;
  /// Snapshot dumps and checkpoints go here when set (and config.snapshots is on).
  std::optional<std::filesystem::path> output_dir;
};

struct Snapshot {
  double t = 0.0;
  std::vector<double> pairings;
  double mass = 0.0;
  double l2 = 0.0;
  double imaginary_residue = 0.0;
  double boundary_fraction = 0.0;
};

struct HartreeRun {
  double epsilon = 0.0;
  int points = 0;  // per axis, axis 0
  double dt = 0.0;
  std::size_t steps = 0;
  std::size_t orbitals = 0;
  InitReport init;
  AssumptionReport margins;
  std::vector<Snapshot> snapshots;
  std::vector<DiagnosticsRecord> records;  // at sample times
  double trace_drift = 0.0;       // |tr rho(t) - tr rho(0)|, exact invariant
  double trace_sq_drift = 0.0;
  double mass_drift = 0.0;        // max |int n - tr rho| / tr rho over samples
  double norm_drift = 0.0;        // max over orbitals and steps of | ||psi_j|| - ||psi_j(0)|| |
  double energy_drift = 0.0;      // max over steps of |E - E0| / |E0|
  double wigner_l2_drift = 0.0;   // max over samples of | ||f|| - ||f(0)|| | / ||f(0)||
  double gram_deviation = 0.0;    // at the final time
  double max_grad_v_l2 = 0.0;
  bool holder_ok = true;
  bool failed = false;
  std::string message;
  double wall_seconds = 0.0;
};

struct VlasovRun {
  std::vector<Snapshot> snapshots;
  struct Row {
    double t, mass, l2, kinetic, potential, total, boundary_loss;
  };
  std::vector<Row> series;  // every step
  double mass_drift = 0.0;
  double energy_drift = 0.0;
  double l2_drift = 0.0;
  bool l2_nonincreasing = true;
  double min_over_max = 0.0;
  double max_kick_cells = 0.0;
  bool failed = false;
  std::string message;
  double wall_seconds = 0.0;
};

HartreeRun run_hartree(const RunConfig& config, double eps, const RunOptions& options = {});
/// refine = -1 runs on the grid coarsened by two in x, xi and t (reference check).
VlasovRun run_vlasov(const RunConfig& config, const RunOptions& options = {}, int refine = 0);

struct RunReport {
  std::string config_hash;
  std::vector<double> epsilons;
  std::vector<double> sample_times;
  std::vector<TestFunction> test_functions;
  std::vector<HartreeRun> hartree;
  VlasovRun vlasov;
  std::optional<double> vlasov_reference_error;
  std::vector<std::vector<double>> distance;  // [eps][t]
  std::vector<double> max_distance;           // per eps
  bool strictly_decreasing = false;
  std::vector<double> empirical_orders;       // log2(D(eps_i) / D(eps_{i+1}))
  double smallest_over_largest = 0.0;
  double grad_v_uniform_ratio = 0.0;          // max ||grad V|| over the sweep / its value at eps_max
  bool failed = false;
  std::vector<std::string> messages;
  double wall_seconds = 0.0;
};

RunReport epsilon_sweep(const RunConfig& config, const RunOptions& options = {});

nlohmann::json to_json(const HartreeRun& run);
nlohmann::json to_json(const VlasovRun& run);
nlohmann::json to_json(const RunReport& report);

/// manifest.json, diagnostics.csv, pairings.csv and report.json.
void write_sweep_outputs(const std::filesystem::path& dir, const RunConfig& config, const RunReport& report);
void write_hartree_outputs(const std::filesystem::path& dir, const RunConfig& config,
                           const std::vector<HartreeRun>& runs);
void write_vlasov_outputs(const std::filesystem::path& dir, const RunConfig& config, const VlasovRun& run);
/// Re-renders pairings.csv and distances.csv from a report.json document.
void render_report_tables(const nlohmann::json& report, const std::filesystem::path& dir);

}  // namespace sclim
