#include "sclim/harness.hpp"

#include <fftw3.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <iostream>
#include <limits>
#include <thread>

#include "sclim/errors.hpp"
#include "sclim/field_io.hpp"

namespace sclim {

namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

constexpr const char* kVersion = "0.1.0";

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Step index of time t on a grid of step dt; ConfigError unless t is a multiple of dt.
std::size_t step_index(double t, double dt, const char* what) {
  const double s = t / dt;
  const double r = std::round(s);
  if (std::abs(s - r) > 1e-9 * std::max(1.0, s))
    throw ConfigError(std::string(what) + " is not a multiple of the time step");
  return static_cast<std::size_t>(r);
}

std::string tag(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

double hartree_energy(const MixedState& s, const FieldSolver& solver, bool coupling) {
  return kinetic_energy(s) + (coupling ? potential_energy(s, solver) : 0.0);
}

json snapshot_json(const Snapshot& s) {
  return {{"t", s.t},
          {"pairings", s.pairings},
          {"mass", s.mass},
          {"l2", s.l2},
          {"imaginary_residue", s.imaginary_residue},
          {"boundary_fraction", s.boundary_fraction}};
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream os(p);
  if (!os) throw ConfigError("cannot write " + p.string());
  return os;
}

void write_manifest(const std::filesystem::path& dir, const RunConfig& config, const std::string& kind) {
  json m;
  m["format"] = "sclim-run";
  m["kind"] = kind;
  m["version"] = kVersion;
  m["config_hash"] = config_hash(config);
  m["config"] = to_json(config);
  m["seed"] = config.seed;
  m["diagnostics_schema"] = kDiagnosticsSchema;
  m["pairings_columns"] = {"eps", "t", "phi_id", "value"};
  m["initial_data"] = "coherent-state mixture on a phase-space lattice (construction chosen by this tool)";
  m["libraries"]["fftw"] = std::string(fftw_version);
  m["libraries"]["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                            "." + std::to_string(EIGEN_MINOR_VERSION);
  io::write_json(dir / "manifest.json", m);
}

void write_diagnostics_csv(const std::filesystem::path& p, const std::vector<HartreeRun>& runs) {
  auto os = open_out(p);
  os << "eps," << DiagnosticsRecord::csv_header() << '\n';
  for (const auto& r : runs)
    for (const auto& rec : r.records) os << io::format_double(r.epsilon) << ',' << rec.csv_row() << '\n';
}

void write_pairings_rows(std::ostream& os, double eps, const std::vector<Snapshot>& snaps) {
  for (const auto& s : snaps)
    for (std::size_t m = 0; m < s.pairings.size(); ++m)
      os << io::format_double(eps) << ',' << io::format_double(s.t) << ',' << m << ','
         << io::format_double(s.pairings[m]) << '\n';
}

}  // namespace

HartreeRun run_hartree(const RunConfig& config, double eps, const RunOptions& options) {
  const auto t0 = Clock::now();
  HartreeRun run;
  run.epsilon = eps;
  const SpectralGrid grid = hartree_grid(config, eps);
  run.points = grid.count(0);
  HartreeParams params;
  params.kappa = config.kappa;
  params.dt = config.hartree_dt_factor * eps;
  params.final_time = config.final_time;
  params.kernel = config.kernel;
  params.dt_cap_factor = config.dt_cap_factor;
  params.coupling = config.coupling;
  params.validate(eps);
  run.dt = params.dt;
  run.steps = step_index(config.final_time, params.dt, "final_time");
  std::vector<std::size_t> sample_steps;
  for (double t : config.sample_times) sample_steps.push_back(step_index(t, params.dt, "sample time"));

  const FieldSolver solver(grid, config.kappa, config.kernel);
  const XiAxes xi_axes = hartree_xi_axes(config, grid, eps);
  MixedState state = init_coherent_mixture(config.profile, eps, grid, config.init, &run.init);
  run.orbitals = state.count();
  run.margins = assumption_margins(state, config.kappa, config.constants);
  if (!run.margins.passed) {
    if (!options.override_assumption_b)
      throw ConfigError("smallness margin for attractive coupling fails; refusing to start (override available)");
    std::cerr << "WARNING: smallness margin for attractive coupling fails (margin "
              << (run.margins.margin ? *run.margins.margin : 0.0) << "); running anyway on override\n";
  }
  const bool dump = options.output_dir && config.snapshots;

  const double trace0 = state.trace(), trace_sq0 = state.trace_squared();
  std::vector<double> norms0;
  for (const auto& o : state.orbitals) norms0.push_back(l2_norm(o));
  const double e0 = hartree_energy(state, solver, config.coupling);
  const double ekin0 = kinetic_energy(state);
  double l2_0 = -1.0;

  try {
    std::size_t next_sample = 0;
    for (std::size_t s = 0;; ++s) {
      while (next_sample < sample_steps.size() && sample_steps[next_sample] == s) {
        WignerReport wrep;
        const WignerGrid f = wigner_transform(state, {xi_axes}, &wrep);
        Snapshot snap;
        snap.t = config.sample_times[next_sample];
        snap.pairings = weak_pairings(f, config.test_functions);
        snap.mass = f.integral();
        snap.l2 = f.l2_norm();
        snap.imaginary_residue = wrep.imaginary_residue;
        snap.boundary_fraction = wrep.boundary_fraction;
        if (l2_0 < 0.0) l2_0 = snap.l2;
        run.wigner_l2_drift = std::max(run.wigner_l2_drift, std::abs(snap.l2 - l2_0) / l2_0);
        run.mass_drift = std::max(run.mass_drift, std::abs(integrate(density(state)) - trace0) / trace0);
        DiagnosticsRecord rec = make_record(state, solver, config.coupling, config.constants, snap.l2);
        rec.t = snap.t;
        run.holder_ok = run.holder_ok && rec.holder_ok;
        run.max_grad_v_l2 = std::max(run.max_grad_v_l2, rec.grad_v_l2);
        run.records.push_back(rec);
        run.snapshots.push_back(std::move(snap));
        if (dump) {
          const auto dir = *options.output_dir / "snapshots";
          std::filesystem::create_directories(dir);
          write_wigner(dir / ("hartree_eps_" + tag(eps) + "_t_" + tag(run.snapshots.back().t)), f);
        }
        ++next_sample;
      }
      if (s == run.steps) break;
      state = strang_step(std::move(state), params, solver);
      const double ekin = kinetic_energy(state);
      const double e = ekin + (config.coupling ? potential_energy(state, solver) : 0.0);
      run.energy_drift = std::max(run.energy_drift, std::abs(e - e0) / std::abs(e0));
      if (!std::isfinite(e)) throw NumericalError("Hartree energy became non-finite");
      if (config.kappa == -1 && ekin > 1e3 * ekin0)
        throw NumericalError("blow-up detected: kinetic energy exceeds 1000x its initial value at t = " +
                             tag(state.time));
      for (std::size_t j = 0; j < state.count(); ++j)
        run.norm_drift = std::max(run.norm_drift, std::abs(l2_norm(state.orbitals[j]) - norms0[j]));
    }
  } catch (const NumericalError& e) {
    run.failed = true;
    run.message = e.what();
  }
  run.trace_drift = std::abs(state.trace() - trace0);
  run.trace_sq_drift = std::abs(state.trace_squared() - trace_sq0);
  run.gram_deviation = state.gram_deviation();
  if (options.output_dir)
    write_checkpoint(*options.output_dir / "checkpoints" / ("eps_" + tag(eps)), state, config.kappa, config.kernel);
  run.wall_seconds = seconds_since(t0);
  return run;
}

VlasovRun run_vlasov(const RunConfig& config, const RunOptions& options, int refine) {
  const auto t0 = Clock::now();
  RunConfig c = config;
  double dt = config.vlasov_dt;
  if (refine == -1) {
    for (auto& n : c.x_points) n /= 2;
    for (auto& n : c.xi_points) n /= 2;
    dt *= 2.0;
  } else if (refine != 0) {
    throw std::invalid_argument("refine must be 0 or -1");
  }
  const SpectralGrid grid = vlasov_grid(c);
  const XiAxes axes = vlasov_axes(c);
  const std::size_t steps = step_index(config.final_time, dt, "final_time");
  std::vector<std::size_t> sample_steps;
  for (double t : config.sample_times) sample_steps.push_back(step_index(t, dt, "sample time"));
  const FieldSolver solver(grid, config.kappa, config.kernel);
  VlasovParams params;
  params.dt = dt;
  params.coupling = config.coupling;
  params.max_boundary_loss = config.max_boundary_loss;

  VlasovRun run;
  VlasovState state = make_vlasov_state(config.profile, grid, axes, solver, config.coupling);
  const VlasovEnergies e0 = vlasov_energies(state, solver, config.coupling);
  run.min_over_max = e0.min_over_max;
  const bool dump = options.output_dir && config.snapshots && refine == 0;
  double prev_l2 = e0.l2;
  try {
    std::size_t next_sample = 0;
    for (std::size_t s = 0;; ++s) {
      const VlasovEnergies e = s == 0 ? e0 : vlasov_energies(state, solver, config.coupling);
      run.series.push_back({state.time, e.mass, e.l2, e.kinetic, e.potential, e.total(), state.lost_mass});
      if (e0.mass > 0.0) run.mass_drift = std::max(run.mass_drift, std::abs(e.mass - e0.mass) / e0.mass);
      if (e0.total() != 0.0)
        run.energy_drift = std::max(run.energy_drift, std::abs(e.total() - e0.total()) / std::abs(e0.total()));
      if (e0.l2 > 0.0) run.l2_drift = std::max(run.l2_drift, std::abs(e.l2 - e0.l2) / e0.l2);
      if (e.l2 > prev_l2 * (1.0 + 1e-12)) run.l2_nonincreasing = false;
      prev_l2 = e.l2;
      run.min_over_max = std::min(run.min_over_max, e.min_over_max);
      while (next_sample < sample_steps.size() && sample_steps[next_sample] == s) {
        Snapshot snap;
        snap.t = config.sample_times[next_sample];
        snap.pairings = weak_pairings(state.f, config.test_functions);
        snap.mass = e.mass;
        snap.l2 = e.l2;
        run.snapshots.push_back(std::move(snap));
        if (dump) {
          const auto dir = *options.output_dir / "snapshots";
          std::filesystem::create_directories(dir);
          write_wigner(dir / ("vlasov_t_" + tag(run.snapshots.back().t)), state.f);
        }
        ++next_sample;
      }
      if (s == steps) break;
      state = vlasov_strang_step(std::move(state), params, solver, e0.mass);
    }
  } catch (const NumericalError& e) {
    run.failed = true;
    run.message = e.what();
  }
  run.max_kick_cells = state.max_kick_cells;
  run.wall_seconds = seconds_since(t0);
  return run;
}

RunReport epsilon_sweep(const RunConfig& config, const RunOptions& options) {
  const auto t0 = Clock::now();
  if (config.epsilons.size() < 3) throw ConfigError("the epsilon sweep needs at least three epsilon values");
  RunReport rep;
  rep.config_hash = config_hash(config);
  rep.epsilons = config.epsilons;
  rep.sample_times = config.sample_times;
  rep.test_functions = config.test_functions;

  rep.vlasov = run_vlasov(config, options);
  if (rep.vlasov.failed) {
    rep.failed = true;
    rep.messages.push_back("vlasov: " + rep.vlasov.message);
  }
  if (config.reference_check) {
    const VlasovRun coarse = run_vlasov(config, {}, -1);
    if (!coarse.failed && !rep.vlasov.failed) {
      double err = 0.0;
      for (std::size_t k = 0; k < coarse.snapshots.size(); ++k)
        for (std::size_t m = 0; m < coarse.snapshots[k].pairings.size(); ++m)
          err = std::max(err, std::abs(coarse.snapshots[k].pairings[m] - rep.vlasov.snapshots[k].pairings[m]));
      rep.vlasov_reference_error = err;
    }
  }

  // Independent jobs; each owns its state. Results are merged in eps order.
  auto job = [&](double eps) {
    try {
      return run_hartree(config, eps, options);
    } catch (const std::exception& e) {
      HartreeRun r;
      r.epsilon = eps;
      r.failed = true;
      r.message = e.what();
      return r;
    }
  };
  if (std::thread::hardware_concurrency() > 1) {
    std::vector<std::future<HartreeRun>> futures;
    for (double eps : config.epsilons) futures.push_back(std::async(std::launch::async, job, eps));
    for (auto& f : futures) rep.hartree.push_back(f.get());
  } else {
    for (double eps : config.epsilons) rep.hartree.push_back(job(eps));
  }

  const std::size_t nt = config.sample_times.size();
  bool complete = rep.vlasov.snapshots.size() == nt;
  for (const auto& r : rep.hartree) {
    if (r.failed) {
      rep.failed = true;
      rep.messages.push_back("hartree eps=" + tag(r.epsilon) + ": " + r.message);
    }
    complete = complete && r.snapshots.size() == nt;
  }
  if (!complete) {
    rep.failed = true;
    rep.messages.push_back("pairing table incomplete");
  }
  for (const auto& r : rep.hartree) {
    std::vector<double> row;
    for (std::size_t k = 0; k < std::min(r.snapshots.size(), rep.vlasov.snapshots.size()); ++k) {
      double d = 0.0;
      for (std::size_t m = 0; m < r.snapshots[k].pairings.size(); ++m)
        d = std::max(d, std::abs(r.snapshots[k].pairings[m] - rep.vlasov.snapshots[k].pairings[m]));
      row.push_back(d);
    }
    rep.max_distance.push_back(row.empty() ? std::numeric_limits<double>::quiet_NaN()
                                           : *std::max_element(row.begin(), row.end()));
    rep.distance.push_back(std::move(row));
  }
  rep.strictly_decreasing = complete;
  for (std::size_t i = 1; i < rep.max_distance.size(); ++i) {
    if (!(rep.max_distance[i] < rep.max_distance[i - 1])) rep.strictly_decreasing = false;
    rep.empirical_orders.push_back(std::log2(rep.max_distance[i - 1] / rep.max_distance[i]) /
                                   std::log2(config.epsilons[i - 1] / config.epsilons[i]));
  }
  rep.smallest_over_largest = rep.max_distance.back() / rep.max_distance.front();
  double gv0 = rep.hartree.front().max_grad_v_l2, gv = 0.0;
  for (const auto& r : rep.hartree) gv = std::max(gv, r.max_grad_v_l2);
  rep.grad_v_uniform_ratio = gv0 > 0.0 ? gv / gv0 : 0.0;
  rep.wall_seconds = seconds_since(t0);
  return rep;
}

json to_json(const HartreeRun& r) {
  json snaps = json::array();
  for (const auto& s : r.snapshots) snaps.push_back(snapshot_json(s));
  json recs = json::array();
  for (const auto& d : r.records)
    recs.push_back({{"t", d.t},
                    {"trace", d.trace},
                    {"trace_sq", d.trace_sq},
                    {"scaled_trace_sq", d.scaled_trace_sq},
                    {"e_kin", d.e_kin},
                    {"e_pot", d.e_pot},
                    {"e_total", d.e_total},
                    {"wigner_l2", d.wigner_l2},
                    {"grad_v_l2", d.grad_v_l2},
                    {"n_l1", d.n_l1},
                    {"n_l5_4", d.n_l54},
                    {"n_l6_5", d.n_l65},
                    {"holder_ok", d.holder_ok},
                    {"margin", std::isnan(d.margin) ? json(nullptr) : json(d.margin)}});
  const auto& m = r.margins;
  return {{"epsilon", r.epsilon},
          {"points", r.points},
          {"dt", r.dt},
          {"steps", r.steps},
          {"orbitals", r.orbitals},
          {"init",
           {{"sites", r.init.sites},
            {"lattice_spacing", r.init.lattice_spacing},
            {"uncovered_mass_fraction", r.init.uncovered_mass_fraction},
            {"dropped_weight_fraction", r.init.dropped_weight_fraction},
            {"min_gram_eigenvalue", r.init.min_gram_eigenvalue},
            {"scaled_purity", r.init.scaled_purity},
            {"purity_within_bound", r.init.purity_within_bound}}},
          {"margins",
           {{"trace", m.trace},
            {"scaled_purity", m.scaled_purity},
            {"kinetic_energy", m.kinetic_energy},
            {"wigner_l2", m.wigner_l2},
            {"c_tilde", optional_json(m.c_tilde)},
            {"margin", optional_json(m.margin)},
            {"c_star", optional_json(m.c_star)},
            {"blocking", m.blocking},
            {"passed", m.passed},
            {"note", m.note}}},
          {"conservation",
           {{"trace_drift", r.trace_drift},
            {"trace_sq_drift", r.trace_sq_drift},
            {"mass_drift", r.mass_drift},
            {"norm_drift", r.norm_drift},
            {"energy_drift", r.energy_drift},
            {"wigner_l2_drift", r.wigner_l2_drift},
            {"gram_deviation", r.gram_deviation},
            {"holder_ok", r.holder_ok},
            {"max_grad_v_l2", r.max_grad_v_l2}}},
          {"snapshots", snaps},
          {"diagnostics", recs},
          {"failed", r.failed},
          {"message", r.message},
          {"wall_seconds", r.wall_seconds}};
}

json to_json(const VlasovRun& r) {
  json snaps = json::array();
  for (const auto& s : r.snapshots) snaps.push_back(snapshot_json(s));
  return {{"snapshots", snaps},
          {"mass_drift", r.mass_drift},
          {"energy_drift", r.energy_drift},
          {"l2_drift", r.l2_drift},
          {"l2_nonincreasing", r.l2_nonincreasing},
          {"min_over_max", r.min_over_max},
          {"max_kick_cells", r.max_kick_cells},
          {"boundary_loss", r.series.empty() ? 0.0 : r.series.back().boundary_loss},
          {"failed", r.failed},
          {"message", r.message},
          {"wall_seconds", r.wall_seconds}};
}

json to_json(const RunReport& rep) {
  json tf = json::array();
  for (const auto& t : rep.test_functions)
    tf.push_back({{"x_center", t.x_center}, {"xi_center", t.xi_center}, {"x_width", t.x_width},
                  {"xi_width", t.xi_width}});
  json h = json::array();
  for (const auto& r : rep.hartree) h.push_back(to_json(r));
  return {{"format", "sclim-report"},
          {"version", kVersion},
          {"config_hash", rep.config_hash},
          {"metric", "D(eps,t) = max over the finite test-function set of |<f^eps(t) - f(t), phi>|; "
                     "a necessary condition for weak-* convergence, raw distances without correction"},
          {"epsilons", rep.epsilons},
          {"sample_times", rep.sample_times},
          {"test_functions", tf},
          {"hartree", h},
          {"vlasov", to_json(rep.vlasov)},
          {"vlasov_reference_error", optional_json(rep.vlasov_reference_error)},
          {"distance", rep.distance},
          {"max_distance", rep.max_distance},
          {"strictly_decreasing", rep.strictly_decreasing},
          {"empirical_orders", rep.empirical_orders},
          {"smallest_over_largest", rep.smallest_over_largest},
          {"grad_v_uniform_ratio", rep.grad_v_uniform_ratio},
          {"failed", rep.failed},
          {"messages", rep.messages},
          {"wall_seconds", rep.wall_seconds}};
}

void write_sweep_outputs(const std::filesystem::path& dir, const RunConfig& config, const RunReport& report) {
  std::filesystem::create_directories(dir);
  write_manifest(dir, config, "sweep");
  write_diagnostics_csv(dir / "diagnostics.csv", report.hartree);
  const json j = to_json(report);
  io::write_json(dir / "report.json", j);
  render_report_tables(j, dir);
}

void write_hartree_outputs(const std::filesystem::path& dir, const RunConfig& config,
                           const std::vector<HartreeRun>& runs) {
  std::filesystem::create_directories(dir);
  write_manifest(dir, config, "hartree");
  write_diagnostics_csv(dir / "diagnostics.csv", runs);
  auto os = open_out(dir / "pairings.csv");
  os << "eps,t,phi_id,value\n";
  json all = json::array();
  for (const auto& r : runs) {
    write_pairings_rows(os, r.epsilon, r.snapshots);
    all.push_back(to_json(r));
  }
  io::write_json(dir / "report.json", {{"format", "sclim-hartree"}, {"config_hash", config_hash(config)}, {"runs", all}});
}

void write_vlasov_outputs(const std::filesystem::path& dir, const RunConfig& config, const VlasovRun& run) {
  std::filesystem::create_directories(dir);
  write_manifest(dir, config, "vlasov");
  {
    auto os = open_out(dir / "timeseries.csv");
    os << "t,mass,l2,kinetic,potential,total,boundary_loss\n";
    for (const auto& r : run.series)
      os << io::format_double(r.t) << ',' << io::format_double(r.mass) << ',' << io::format_double(r.l2) << ','
         << io::format_double(r.kinetic) << ',' << io::format_double(r.potential) << ','
         << io::format_double(r.total) << ',' << io::format_double(r.boundary_loss) << '\n';
  }
  auto os = open_out(dir / "pairings.csv");
  os << "eps,t,phi_id,value\n";
  write_pairings_rows(os, 0.0, run.snapshots);
  io::write_json(dir / "report.json", {{"format", "sclim-vlasov"}, {"config_hash", config_hash(config)},
                                       {"run", to_json(run)}});
}

void render_report_tables(const json& report, const std::filesystem::path& dir) {
  try {
    std::filesystem::create_directories(dir);
    auto os = open_out(dir / "pairings.csv");
    os << "eps,t,phi_id,value\n";
    auto rows = [&](double eps, const json& snaps) {
      for (const auto& s : snaps) {
        const auto& p = s.at("pairings");
        for (std::size_t m = 0; m < p.size(); ++m)
          os << io::format_double(eps) << ',' << io::format_double(s.at("t").get<double>()) << ',' << m << ','
             << io::format_double(p[m].get<double>()) << '\n';
      }
    };
    for (const auto& h : report.at("hartree")) rows(h.at("epsilon").get<double>(), h.at("snapshots"));
    rows(0.0, report.at("vlasov").at("snapshots"));
    auto ds = open_out(dir / "distances.csv");
    ds << "eps,t,distance\n";
    const auto& eps = report.at("epsilons");
    const auto& times = report.at("sample_times");
    const auto& dist = report.at("distance");
    for (std::size_t i = 0; i < dist.size(); ++i)
      for (std::size_t k = 0; k < dist[i].size(); ++k)
        ds << io::format_double(eps[i].get<double>()) << ',' << io::format_double(times[k].get<double>()) << ','
           << io::format_double(dist[i][k].get<double>()) << '\n';
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed report: ") + e.what());
  }
}

}  // namespace sclim
