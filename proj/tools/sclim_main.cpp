// sclim: command-line driver for Hartree, Vlasov and eps-sweep runs.
// Exit codes: 0 success, 2 configuration error, 3 numerical failure.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "sclim/config.hpp"
#include "sclim/diagnostics.hpp"
#include "sclim/errors.hpp"
#include "sclim/field_io.hpp"
#include "sclim/harness.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kNumericalError = 3;

struct Common {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  bool override_b = false;
};

sclim::RunConfig load(const Common& c) {
  if (c.config.empty()) throw sclim::ConfigError("--config is required");
  sclim::RunConfig cfg = sclim::load_config(c.config);
  if (!c.out.empty()) cfg.output_dir = c.out;
  if (c.seed) cfg.seed = *c.seed;
  return cfg;
}

sclim::RunOptions options(const Common& c, const sclim::RunConfig& cfg) {
  return {c.override_b, std::filesystem::path(cfg.output_dir)};
}

int cmd_hartree(const Common& c) {
  const auto cfg = load(c);
  std::vector<sclim::HartreeRun> runs;
  bool failed = false;
  for (double eps : cfg.epsilons) {
    runs.push_back(sclim::run_hartree(cfg, eps, options(c, cfg)));
    const auto& r = runs.back();
    std::cout << "hartree eps=" << eps << " N=" << r.points << " J=" << r.orbitals << " energy_drift="
              << r.energy_drift << " mass_drift=" << r.mass_drift << (r.failed ? " FAILED: " + r.message : "")
              << '\n';
    failed = failed || r.failed;
  }
  sclim::write_hartree_outputs(cfg.output_dir, cfg, runs);
  return failed ? kNumericalError : kOk;
}

int cmd_vlasov(const Common& c) {
  const auto cfg = load(c);
  const auto run = sclim::run_vlasov(cfg, options(c, cfg));
  sclim::write_vlasov_outputs(cfg.output_dir, cfg, run);
  std::cout << "vlasov mass_drift=" << run.mass_drift << " energy_drift=" << run.energy_drift
            << (run.failed ? " FAILED: " + run.message : "") << '\n';
  return run.failed ? kNumericalError : kOk;
}

int cmd_sweep(const Common& c) {
  const auto cfg = load(c);
  const auto rep = sclim::epsilon_sweep(cfg, options(c, cfg));
  sclim::write_sweep_outputs(cfg.output_dir, cfg, rep);
  for (std::size_t i = 0; i < rep.epsilons.size(); ++i)
    std::cout << "eps=" << rep.epsilons[i] << " max_t D=" << rep.max_distance[i] << '\n';
  std::cout << "strictly_decreasing=" << (rep.strictly_decreasing ? "yes" : "no")
            << " smallest/largest=" << rep.smallest_over_largest << '\n';
  for (const auto& m : rep.messages) std::cerr << m << '\n';
  return rep.failed ? kNumericalError : kOk;
}

int cmd_check(const std::string& dir, const std::string& config) {
  const auto cp = sclim::read_checkpoint(dir);
  std::optional<sclim::AssumptionConstants> constants;
  bool coupling = true;
  if (!config.empty()) {
    const auto cfg = sclim::load_config(config);
    constants = cfg.constants;
    coupling = cfg.coupling;
  }
  const sclim::FieldSolver solver(cp.state.grid(), cp.kappa, cp.kernel);
  const auto rec = sclim::make_record(cp.state, solver, coupling, constants);
  std::cout << sclim::DiagnosticsRecord::csv_header() << '\n' << rec.csv_row() << '\n';
  return kOk;
}

int cmd_report(const std::string& path, const std::string& out) {
  const auto doc = sclim::io::read_json(path);
  const std::filesystem::path dir = out.empty() ? std::filesystem::path(path).parent_path() : std::filesystem::path(out);
  sclim::render_report_tables(doc, dir.empty() ? "." : dir);
  std::cout << "tables written to " << (dir.empty() ? std::string(".") : dir.string()) << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semiclassical-limit laboratory: Hartree, Vlasov-Poisson and eps sweeps"};
  app.require_subcommand(1);
  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config, "run configuration (JSON)");
    sub->add_option("--out", common.out, "output directory (overrides the config)");
    sub->add_option("--seed", common.seed, "seed recorded in the manifest");
    sub->add_flag("--override-assumption-b", common.override_b,
                  "run attractive cases even when the smallness margin fails");
  };
  auto* hartree = app.add_subcommand("hartree", "Hartree runs for every eps in the config");
  auto* vlasov = app.add_subcommand("vlasov", "Vlasov-Poisson reference run");
  auto* sweep = app.add_subcommand("sweep", "full eps sweep with distance report");
  add_common(hartree);
  add_common(vlasov);
  add_common(sweep);
  std::string checkpoint, check_config;
  auto* check = app.add_subcommand("check", "diagnostics of a checkpoint directory");
  check->add_option("checkpoint", checkpoint, "checkpoint directory")->required();
  check->add_option("--config", check_config, "config supplying constants and coupling");
  std::string report_path, report_out;
  auto* report = app.add_subcommand("report", "re-render a report.json into CSV tables");
  report->add_option("report", report_path, "report.json")->required();
  report->add_option("--out", report_out, "directory for the tables");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }
  try {
    if (*hartree) return cmd_hartree(common);
    if (*vlasov) return cmd_vlasov(common);
    if (*sweep) return cmd_sweep(common);
    if (*check) return cmd_check(checkpoint, check_config);
    if (*report) return cmd_report(report_path, report_out);
  } catch (const sclim::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kConfigError;
  } catch (const sclim::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumericalError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumericalError;
  }
  return kOk;
}
