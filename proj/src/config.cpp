#include "sclim/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <set>

#include "sclim/errors.hpp"
#include "sclim/field_io.hpp"

namespace sclim {

namespace {

using nlohmann::json;

// Reads keys from one JSON object and rejects any key it was not asked about.
class Reader {
 public:
  Reader(const json& obj, std::string where) : obj_(obj), where_(std::move(where)) {
    if (!obj_.is_object()) throw ConfigError(where_ + ": expected a JSON object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return obj_.contains(key);
  }

  const json& raw(const std::string& key) {
    if (!has(key)) throw ConfigError(where_ + ": missing required key '" + key + "'");
    return obj_.at(key);
  }

  template <class T>
  T get(const std::string& key) {
    return convert<T>(raw(key), key);
  }

  template <class T>
  T get_or(const std::string& key, T fallback) {
    return has(key) ? convert<T>(obj_.at(key), key) : fallback;
  }

  void finish() const {
    for (const auto& [key, value] : obj_.items())
      if (!seen_.contains(key)) throw ConfigError(where_ + ": unknown key '" + key + "'");
  }

  std::string where(const std::string& key) const { return where_ + "." + key; }

 private:
  template <class T>
  T convert(const json& v, const std::string& key) const {
    try {
      if constexpr (std::is_same_v<T, double>) {
        if (!v.is_number()) throw ConfigError(where(key) + ": expected a number");
      } else if constexpr (std::is_same_v<T, int> || std::is_same_v<T, std::uint64_t>) {
        if (!v.is_number_integer()) throw ConfigError(where(key) + ": expected an integer");
      } else if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw ConfigError(where(key) + ": expected true or false");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw ConfigError(where(key) + ": expected a string");
      } else {
        if (!v.is_array()) throw ConfigError(where(key) + ": expected an array");
      }
      return v.get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(where(key) + ": " + e.what());
    }
  }

  const json& obj_;
  std::string where_;
  std::set<std::string> seen_;
};

Vec3 read_vec(Reader& r, const std::string& key, int d, std::optional<Vec3> fallback = std::nullopt) {
  if (fallback && !r.has(key)) return *fallback;
  const auto v = r.get<std::vector<double>>(key);
  if (static_cast<int>(v.size()) != d)
    throw ConfigError(r.where(key) + ": expected " + std::to_string(d) + " entries");
  Vec3 out{0.0, 0.0, 0.0};
  for (int a = 0; a < d; ++a) out[a] = v[a];
  return out;
}

json vec_json(const Vec3& v, int d) { return std::vector<double>(v.begin(), v.begin() + d); }

int next_pow2(double x) {
  int n = 4;
  while (n < x) n *= 2;
  return n;
}

}  // namespace

RunConfig parse_config(const json& doc) {
  Reader r(doc, "config");
  RunConfig c;
  c.dimension = r.get<int>("dimension");
  const int d = c.dimension;
  if (d < 1 || d > kMaxDim) throw ConfigError("config.dimension must be 1, 2 or 3");
  auto per_axis = [&](auto& dst, const char* key) {
    using V = std::decay_t<decltype(dst)>;
    dst = r.get<V>(key);
    if (static_cast<int>(dst.size()) != d)
      throw ConfigError(r.where(key) + ": expected one entry per axis");
  };
  per_axis(c.length, "length");
  per_axis(c.x_points, "x_points");
  per_axis(c.xi_points, "xi_points");
  per_axis(c.xi_max, "xi_max");
  for (int a = 0; a < d; ++a)
    if (!(c.xi_max[a] > 0.0) || c.xi_points[a] < 4) throw ConfigError("config: xi grid needs xi_max > 0, xi_points >= 4");
  try {
    (void)vlasov_grid(c);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config grid: ") + e.what());
  }

  c.kappa = r.get<int>("kappa");
  if (c.kappa != 1 && c.kappa != -1) throw ConfigError("config.kappa must be +1 or -1");
  if (r.has("kernel")) {
    Reader k(r.raw("kernel"), "config.kernel");
    const auto type = k.get<std::string>("type");
    if (type == "coulomb") {
      c.kernel = Kernel::coulomb();
    } else if (type == "yukawa") {
      const double lam = k.get<double>("screening");
      if (!(lam > 0.0)) throw ConfigError("config.kernel.screening must be positive");
      c.kernel = Kernel::yukawa(lam);
    } else {
      throw ConfigError("config.kernel.type must be 'coulomb' or 'yukawa'");
    }
    k.finish();
  }
  c.coupling = r.get_or("coupling", true);

  c.epsilons = r.get<std::vector<double>>("epsilons");
  if (c.epsilons.empty()) throw ConfigError("config.epsilons must not be empty");
  for (std::size_t i = 0; i < c.epsilons.size(); ++i) {
    if (!(c.epsilons[i] > 0.0 && c.epsilons[i] < 1.0)) throw ConfigError("config.epsilons must lie in (0, 1)");
    if (i > 0 && !(c.epsilons[i] < c.epsilons[i - 1]))
      throw ConfigError("config.epsilons must be strictly decreasing");
  }
  c.hartree_dt_factor = r.get_or("hartree_dt_factor", c.hartree_dt_factor);
  c.dt_cap_factor = r.get_or("dt_cap_factor", c.dt_cap_factor);
  c.vlasov_dt = r.get_or("vlasov_dt", c.vlasov_dt);
  c.final_time = r.get<double>("final_time");
  if (!(c.hartree_dt_factor > 0.0) || !(c.vlasov_dt > 0.0) || !(c.final_time >= 0.0))
    throw ConfigError("config: time steps must be positive and final_time non-negative");
  if (c.hartree_dt_factor > c.dt_cap_factor) throw ConfigError("config: hartree_dt_factor exceeds dt_cap_factor");
  c.sample_times = r.get<std::vector<double>>("sample_times");
  for (std::size_t i = 0; i < c.sample_times.size(); ++i) {
    const double t = c.sample_times[i];
    if (!(t >= 0.0 && t <= c.final_time)) throw ConfigError("config.sample_times must lie in [0, final_time]");
    if (i > 0 && !(t > c.sample_times[i - 1])) throw ConfigError("config.sample_times must be increasing");
  }

  std::vector<GaussianComponent> comps;
  const json& prof = r.raw("profile");
  if (!prof.is_array()) throw ConfigError("config.profile: expected an array of Gaussian components");
  for (std::size_t i = 0; i < prof.size(); ++i) {
    Reader p(prof[i], "config.profile[" + std::to_string(i) + "]");
    GaussianComponent g;
    g.weight = p.get<double>("weight");
    g.x_center = read_vec(p, "x_center", d);
    g.xi_center = read_vec(p, "xi_center", d);
    g.x_width = read_vec(p, "x_width", d);
    g.xi_width = read_vec(p, "xi_width", d);
    p.finish();
    comps.push_back(g);
  }
  try {
    c.profile = PhaseSpaceProfile(d, std::move(comps));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config.profile: ") + e.what());
  }

  if (r.has("test_functions")) {
    const json& tf = r.raw("test_functions");
    if (!tf.is_array() || tf.empty()) throw ConfigError("config.test_functions: expected a non-empty array");
    for (std::size_t i = 0; i < tf.size(); ++i) {
      Reader p(tf[i], "config.test_functions[" + std::to_string(i) + "]");
      TestFunction t;
      t.x_center = read_vec(p, "x_center", d);
      t.xi_center = read_vec(p, "xi_center", d);
      t.x_width = read_vec(p, "x_width", d);
      t.xi_width = read_vec(p, "xi_width", d);
      p.finish();
      for (int a = 0; a < d; ++a)
        if (!(t.x_width[a] > 0.0) || !(t.xi_width[a] > 0.0))
          throw ConfigError("config.test_functions: widths must be positive");
      c.test_functions.push_back(t);
    }
    c.default_test_functions = false;
  } else {
    c.test_functions = default_test_functions(c.profile);
  }

  if (r.has("init")) {
    Reader p(r.raw("init"), "config.init");
    const auto method = p.get_or<std::string>("method", "spectral");
    if (method == "spectral")
      c.init.method = Orthonormalization::spectral;
    else if (method == "lowdin")
      c.init.method = Orthonormalization::lowdin;
    else
      throw ConfigError("config.init.method must be 'spectral' or 'lowdin'");
    c.init.lattice_factor = p.get_or("lattice_factor", c.init.lattice_factor);
    c.init.support_sigmas = p.get_or("support_sigmas", c.init.support_sigmas);
    c.init.site_cutoff = p.get_or("site_cutoff", c.init.site_cutoff);
    c.init.eigen_cutoff = p.get_or("eigen_cutoff", c.init.eigen_cutoff);
    c.init.gram_floor = p.get_or("gram_floor", c.init.gram_floor);
    c.init.coverage_tolerance = p.get_or("coverage_tolerance", c.init.coverage_tolerance);
    c.init.purity_bound = p.get_or("purity_bound", c.init.purity_bound);
    p.finish();
  }
  if (r.has("constants")) {
    Reader p(r.raw("constants"), "config.constants");
    AssumptionConstants k;
    k.c_s = p.get<double>("C_s");
    k.c_2 = p.get<double>("C_2");
    k.provenance = p.get<std::string>("provenance");
    p.finish();
    if (!(k.c_s > 0.0) || !(k.c_2 > 0.0)) throw ConfigError("config.constants must be positive");
    if (k.provenance.empty()) throw ConfigError("config.constants.provenance must name the source of the values");
    c.constants = k;
  }
  if (c.kappa == -1 && c.coupling && d == 3 && !c.constants)
    throw ConfigError("config.constants (C_s, C_2, provenance) are required for kappa = -1 in three dimensions");
  c.max_boundary_loss = r.get_or("max_boundary_loss", c.max_boundary_loss);
  c.reference_check = r.get_or("reference_check", c.reference_check);
  c.snapshots = r.get_or("snapshots", c.snapshots);
  c.output_dir = r.get_or<std::string>("output_dir", c.output_dir);
  c.seed = r.get_or<std::uint64_t>("seed", c.seed);
  r.finish();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) { return parse_config(io::read_json(path)); }

json to_json(const RunConfig& c) {
  const int d = c.dimension;
  json j;
  j["dimension"] = d;
  j["length"] = c.length;
  j["x_points"] = c.x_points;
  j["xi_points"] = c.xi_points;
  j["xi_max"] = c.xi_max;
  j["kappa"] = c.kappa;
  j["kernel"] = c.kernel.type == KernelType::coulomb ? json{{"type", "coulomb"}}
                                                     : json{{"type", "yukawa"}, {"screening", c.kernel.screening}};
  j["coupling"] = c.coupling;
  j["epsilons"] = c.epsilons;
  j["hartree_dt_factor"] = c.hartree_dt_factor;
  j["dt_cap_factor"] = c.dt_cap_factor;
  j["vlasov_dt"] = c.vlasov_dt;
  j["final_time"] = c.final_time;
  j["sample_times"] = c.sample_times;
  j["profile"] = json::array();
  for (const auto& g : c.profile.components())
    j["profile"].push_back({{"weight", g.weight},
                            {"x_center", vec_json(g.x_center, d)},
                            {"xi_center", vec_json(g.xi_center, d)},
                            {"x_width", vec_json(g.x_width, d)},
                            {"xi_width", vec_json(g.xi_width, d)}});
  j["test_functions"] = json::array();
  for (const auto& t : c.test_functions)
    j["test_functions"].push_back({{"x_center", vec_json(t.x_center, d)},
                                   {"xi_center", vec_json(t.xi_center, d)},
                                   {"x_width", vec_json(t.x_width, d)},
                                   {"xi_width", vec_json(t.xi_width, d)}});
  j["init"] = {{"method", c.init.method == Orthonormalization::spectral ? "spectral" : "lowdin"},
               {"lattice_factor", c.init.lattice_factor},
               {"support_sigmas", c.init.support_sigmas},
               {"site_cutoff", c.init.site_cutoff},
               {"eigen_cutoff", c.init.eigen_cutoff},
               {"gram_floor", c.init.gram_floor},
               {"coverage_tolerance", c.init.coverage_tolerance},
               {"purity_bound", c.init.purity_bound}};
  if (c.constants)
    j["constants"] = {{"C_s", c.constants->c_s}, {"C_2", c.constants->c_2}, {"provenance", c.constants->provenance}};
  j["max_boundary_loss"] = c.max_boundary_loss;
  j["reference_check"] = c.reference_check;
  j["snapshots"] = c.snapshots;
  j["output_dir"] = c.output_dir;
  j["seed"] = c.seed;
  return j;
}

std::string config_hash(const RunConfig& config) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : to_json(config).dump()) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::vector<TestFunction> default_test_functions(const PhaseSpaceProfile& f0) {
  const int d = f0.dim();
  const Vec3 mx = f0.mean_x(), mk = f0.mean_xi(), sx = f0.std_x(), sk = f0.std_xi();
  std::vector<TestFunction> out;
  for (int i = -1; i <= 1; ++i)
    for (int k = -1; k <= 1; ++k) {
      TestFunction t;
      t.x_center = mx;
      t.xi_center = mk;
      t.x_center[0] += i * sx[0];
      t.xi_center[0] += k * sk[0];
      for (int a = 0; a < d; ++a) {
        t.x_width[a] = 0.75 * sx[a];
        t.xi_width[a] = 0.75 * sk[a];
      }
      out.push_back(t);
    }
  return out;
}

SpectralGrid vlasov_grid(const RunConfig& c) {
  return SpectralGrid(c.dimension, c.length, c.x_points);
}

XiAxes vlasov_axes(const RunConfig& c) {
  XiAxes axes{};
  for (int a = 0; a < c.dimension; ++a) axes[a] = XiAxis{c.xi_points[a], c.xi_max[a]};
  return axes;
}

SpectralGrid hartree_grid(const RunConfig& c, double eps) {
  std::vector<int> counts(c.x_points);
  for (int a = 0; a < c.dimension; ++a) {
    double xi_extent = 0.0;
    for (const auto& g : c.profile.components())
      xi_extent = std::max(xi_extent, std::abs(g.xi_center[a]) + c.init.support_sigmas * g.xi_width[a]);
    const double needed = 2.0 * xi_extent * c.length[a] / (std::numbers::pi * eps);
    counts[a] = std::max(counts[a], next_pow2(needed));
  }
  return SpectralGrid(c.dimension, c.length, counts);
}

XiAxes hartree_xi_axes(const RunConfig& c, const SpectralGrid& grid, double eps) {
  int over = 1;
  for (int a = 0; a < c.dimension; ++a)
    for (const auto& t : c.test_functions)
      while (t.xi_width[a] < 2.0 * WignerGrid::dual_axes(grid, eps, over)[a].spacing()) over *= 2;
  return WignerGrid::dual_axes(grid, eps, over);
}

}  // namespace sclim
