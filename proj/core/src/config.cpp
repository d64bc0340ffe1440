#include "kvflow/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "kvflow/mixing_length.hpp"

namespace kvflow {

namespace {

[[noreturn]] void bad(const std::string& key, const std::string& why) {
  throw std::invalid_argument(key + ": " + why);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double parse_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(v, &used);
  } catch (const std::exception&) {
    bad(key, "expected a number, got '" + v + "'");
  }
  if (used != v.size()) bad(key, "expected a number, got '" + v + "'");
  return x;
}

template <class Int>
Int parse_int(const std::string& key, const std::string& v) {
  Int x{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || ptr != v.data() + v.size()) bad(key, "expected an integer, got '" + v + "'");
  return x;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  bad(key, "expected true or false, got '" + v + "'");
}

std::vector<double> parse_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  if (v.empty()) return out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(key, trim(item)));
  return out;
}

template <class T>
std::string join(const T& values, std::size_t count) {
  std::string s;
  for (std::size_t i = 0; i < count; ++i) {
    if (i) s += ",";
    if constexpr (std::is_same_v<std::decay_t<decltype(values[i])>, double>)
      s += fmt(values[i]);
    else
      s += std::to_string(values[i]);
  }
  return s;
}

struct Key {
  std::string name;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define KV_DOUBLE(key, member)                                                                \
  Key {                                                                                       \
    key, [](RunConfig& c, const std::string& v) { c.member = parse_double(key, v); },        \
        [](const RunConfig& c) { return fmt(c.member); }                                      \
  }
#define KV_INT(key, member)                                                                              \
  Key {                                                                                                  \
    key, [](RunConfig& c, const std::string& v) { c.member = parse_int<decltype(c.member)>(key, v); }, \
        [](const RunConfig& c) { return std::to_string(c.member); }                                      \
  }
#define KV_STRING(key, member)                                                    \
  Key {                                                                           \
    key, [](RunConfig& c, const std::string& v) { c.member = v; },               \
        [](const RunConfig& c) { return c.member; }                               \
  }

const std::vector<Key>& keys() {
  static const std::vector<Key> table = {
      {"grid.mode",
       [](RunConfig& c, const std::string& v) {
         if (v == "channel")
           c.grid.mode = GeometryMode::channel;
         else if (v == "box")
           c.grid.mode = GeometryMode::box;
         else
           bad("grid.mode", "expected 'channel' or 'box', got '" + v + "'");
       },
       [](const RunConfig& c) { return to_string(c.grid.mode); }},
      KV_INT("grid.dim", grid.dim),
      {"grid.extents",
       [](RunConfig& c, const std::string& v) {
         const auto xs = parse_list("grid.extents", v);
         if (static_cast<int>(xs.size()) != c.grid.dim)
           bad("grid.extents", "expected " + std::to_string(c.grid.dim) + " values");
         c.grid.extents = {1.0, 1.0, 1.0};
         for (std::size_t a = 0; a < xs.size(); ++a) c.grid.extents[a] = xs[a];
       },
       [](const RunConfig& c) { return join(c.grid.extents, c.grid.dim); }},
      {"grid.cells",
       [](RunConfig& c, const std::string& v) {
         const auto xs = parse_list("grid.cells", v);
         if (static_cast<int>(xs.size()) != c.grid.dim)
           bad("grid.cells", "expected " + std::to_string(c.grid.dim) + " values");
         c.grid.cells = {1, 1, 1};
         for (std::size_t a = 0; a < xs.size(); ++a) {
           if (xs[a] != std::floor(xs[a]) || std::abs(xs[a]) > 1e9) bad("grid.cells", "expected integers");
           c.grid.cells[a] = static_cast<int>(xs[a]);
         }
       },
       [](const RunConfig& c) { return join(c.grid.cells, c.grid.dim); }},
      KV_DOUBLE("physics.nu", physics.nu),
      KV_DOUBLE("physics.alpha", physics.alpha),
      {"physics.profile",
       [](RunConfig& c, const std::string& v) { c.physics.profile.kind = mixing_length_kind_from_string(v); },
       [](const RunConfig& c) { return to_string(c.physics.profile.kind); }},
      KV_DOUBLE("physics.kappa", physics.profile.kappa),
      KV_DOUBLE("physics.damping", physics.profile.damping),
      KV_DOUBLE("physics.ell0", physics.profile.constant),
      {"physics.ell_samples",
       [](RunConfig& c, const std::string& v) { c.physics.profile.samples = parse_list("physics.ell_samples", v); },
       [](const RunConfig& c) { return join(c.physics.profile.samples, c.physics.profile.samples.size()); }},
      {"physics.allow_kappa_override",
       [](RunConfig& c, const std::string& v) {
         c.physics.profile.allow_kappa_override = parse_bool("physics.allow_kappa_override", v);
       },
       [](const RunConfig& c) { return std::string(c.physics.profile.allow_kappa_override ? "true" : "false"); }},
      {"physics.voigt_form",
       [](RunConfig& c, const std::string& v) { c.physics.voigt_form = voigt_form_from_string(v); },
       [](const RunConfig& c) { return to_string(c.physics.voigt_form); }},
      {"physics.forcing",
       [](RunConfig& c, const std::string& v) {
         const auto xs = parse_list("physics.forcing", v);
         if (xs.empty() || xs.size() > 3) bad("physics.forcing", "expected 1 to 3 values");
         c.forcing = {0.0, 0.0, 0.0};
         for (std::size_t a = 0; a < xs.size(); ++a) c.forcing[a] = xs[a];
       },
       [](const RunConfig& c) { return join(c.forcing, 3); }},
      {"physics.eddy", [](RunConfig& c, const std::string& v) { c.eddy = eddy_kind_from_string(v); },
       [](const RunConfig& c) { return to_string(c.eddy); }},
      KV_DOUBLE("physics.eddy_scale", eddy_scale),
      KV_DOUBLE("physics.eddy_bound", physics.eddy_bound),
      KV_DOUBLE("scheme.dt", scheme.dt),
      KV_DOUBLE("scheme.t_end", scheme.t_end),
      KV_DOUBLE("scheme.tol_picard", scheme.tol_picard),
      KV_INT("scheme.max_picard", scheme.max_picard),
      KV_DOUBLE("scheme.tol_proj", scheme.tol_proj),
      KV_DOUBLE("scheme.tol_linear", scheme.tol_linear),
      KV_INT("scheme.max_linear", scheme.max_linear),
      {"scheme.coupling", [](RunConfig& c, const std::string& v) { c.coupling.mode = coupling_mode_from_string(v); },
       [](const RunConfig& c) { return to_string(c.coupling.mode); }},
      KV_DOUBLE("scheme.tol_couple", coupling.tol_couple),
      KV_INT("scheme.max_couple_iters", coupling.max_couple_iters),
      KV_DOUBLE("tke.n_visc", tke.n_visc),
      KV_DOUBLE("tke.n_diff", tke.n_diff),
      KV_DOUBLE("tke.c_diff", tke.c_diff),
      {"tke.eta",
       [](RunConfig& c, const std::string& v) {
         if (v == "auto")
           c.tke.eta.reset();
         else
           c.tke.eta = parse_double("tke.eta", v);
       },
       [](const RunConfig& c) { return c.tke.eta ? fmt(*c.tke.eta) : std::string("auto"); }},
      KV_DOUBLE("tke.n_src", tke.n_src),
      KV_INT("init.seed", init.seed),
      KV_DOUBLE("init.amplitude", init.amplitude),
      KV_INT("init.max_mode", init.max_mode),
      KV_DOUBLE("init.k0", init.k0),
      KV_STRING("output.csv", output.csv),
      KV_STRING("output.summary", output.summary),
      KV_STRING("output.checkpoint", output.checkpoint),
      KV_INT("output.checkpoint_every", output.checkpoint_every),
      KV_INT("output.csv_every", output.csv_every),
      KV_DOUBLE("checks.energy_step", checks.energy_step),
      KV_DOUBLE("checks.energy_cumulative", checks.energy_cumulative),
      KV_DOUBLE("checks.tke_budget", checks.tke_budget),
      KV_DOUBLE("checks.clipped_fraction", checks.clipped_fraction),
  };
  return table;
}

#undef KV_DOUBLE
#undef KV_INT
#undef KV_STRING

void apply_grid_kind(GridSpec& g) {
  g.bc = {AxisKind::periodic, AxisKind::periodic, AxisKind::periodic};
  if (g.mode == GeometryMode::channel && g.dim >= 2 && g.dim <= 3) g.bc[g.dim - 1] = AxisKind::wall;
}

void check_dir(const std::string& key, const std::string& path) {
  if (path.empty()) return;
  const std::filesystem::path parent = std::filesystem::path(path).parent_path();
  if (!parent.empty() && !std::filesystem::is_directory(parent))
    bad(key, "directory '" + parent.string() + "' does not exist");
}

}  // namespace

std::string to_string(EddyKind kind) {
  switch (kind) {
    case EddyKind::none: return "none";
    case EddyKind::uniform: return "uniform";
    case EddyKind::ell_shape: return "ell_shape";
  }
  return "none";
}

EddyKind eddy_kind_from_string(const std::string& name) {
  for (EddyKind k : {EddyKind::none, EddyKind::uniform, EddyKind::ell_shape})
    if (to_string(k) == name) return k;
  bad("physics.eddy", "expected 'none', 'uniform' or 'ell_shape', got '" + name + "'");
}

void RunConfig::validate() const {
  grid.validate();
  physics.validate();
  for (double f : forcing)
    if (!std::isfinite(f)) bad("physics.forcing", "must be finite");
  if (!(eddy_scale >= 0.0) || !std::isfinite(eddy_scale)) bad("physics.eddy_scale", "must be nonnegative");
  if (eddy != EddyKind::none && eddy_scale > physics.eddy_bound) bad("physics.eddy_scale", "exceeds physics.eddy_bound");
  scheme.validate();
  tke.validate();
  coupling.validate();
  if (!(init.amplitude >= 0.0) || !std::isfinite(init.amplitude)) bad("init.amplitude", "must be nonnegative");
  if (init.max_mode < 1) bad("init.max_mode", "must be at least 1");
  if (!(init.k0 >= 0.0) || !std::isfinite(init.k0)) bad("init.k0", "must be nonnegative");
  if (output.checkpoint_every < 0) bad("output.checkpoint_every", "must be nonnegative");
  if (output.csv_every < 1) bad("output.csv_every", "must be at least 1");
  if (!(checks.energy_step > 0.0)) bad("checks.energy_step", "must be positive");
  if (!(checks.energy_cumulative > 0.0)) bad("checks.energy_cumulative", "must be positive");
  if (!(checks.tke_budget > 0.0)) bad("checks.tke_budget", "must be positive");
  if (!(checks.clipped_fraction > 0.0)) bad("checks.clipped_fraction", "must be positive");
  // Profile and geometry must fit together.
  (void)eval_mixing_length(physics.profile, build_grid(grid));
}

void RunConfig::validate_paths() const {
  check_dir("output.csv", output.csv);
  check_dir("output.summary", output.summary);
  check_dir("output.checkpoint", output.checkpoint);
}

RunConfig parse_config(const std::string& text) {
  std::map<std::string, std::string> values;
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("line " + std::to_string(number) + ": expected 'section.key = value'");
    const std::string key = trim(t.substr(0, eq));
    const auto dot = key.find('.');
    if (key.empty() || dot == std::string::npos || dot == 0 || dot + 1 == key.size() ||
        key.find_first_of(" \t") != std::string::npos)
      throw std::invalid_argument("line " + std::to_string(number) + ": malformed key '" + key + "'");
    if (!values.emplace(key, trim(t.substr(eq + 1))).second) bad(key, "given more than once");
  }

  RunConfig cfg;
  for (const Key& k : keys()) {
    const auto it = values.find(k.name);
    if (it == values.end()) continue;
    k.set(cfg, it->second);
    values.erase(it);
  }
  if (!values.empty()) bad(values.begin()->first, "unknown key");
  apply_grid_kind(cfg.grid);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string echo_config(const RunConfig& cfg) {
  std::string out;
  for (const Key& k : keys()) out += k.name + " = " + k.get(cfg) + "\n";
  return out;
}

FlowSolver make_flow_solver(const RunConfig& cfg) {
  const GridPtr grid = build_grid(cfg.grid);
  PhysicsConfig phys = cfg.physics;
  if (cfg.forcing != std::array<double, 3>{0.0, 0.0, 0.0}) phys.forcing = Forcing::uniform(grid, cfg.forcing);
  switch (cfg.eddy) {
    case EddyKind::none: break;
    case EddyKind::uniform: {
      const ScalarField nu_t(grid, cfg.eddy_scale);
      phys.eddy_viscosity = [nu_t](double) { return nu_t; };
      break;
    }
    case EddyKind::ell_shape: {
      ScalarField nu_t = eval_mixing_length(phys.profile, grid);
      const double top = nu_t.max();
      for (double& x : nu_t.values().values()) x = top > 0.0 ? cfg.eddy_scale * x / top : 0.0;
      phys.eddy_viscosity = [nu_t](double) { return nu_t; };
      break;
    }
  }
  return FlowSolver(grid, phys, cfg.scheme);
}

}  // namespace kvflow
