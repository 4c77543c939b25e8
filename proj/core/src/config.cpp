#include "mppic/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "mppic/error.hpp"

namespace mppic {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> words(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

double to_double(const std::string& w, int line) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(w.data(), w.data() + w.size(), v);
  if (ec != std::errc() || ptr != w.data() + w.size()) throw ConfigError("expected a number, got \"" + w + "\"", line);
  return v;
}

long long to_int(const std::string& w, int line) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(w.data(), w.data() + w.size(), v);
  if (ec != std::errc() || ptr != w.data() + w.size()) throw ConfigError("expected an integer, got \"" + w + "\"", line);
  return v;
}

std::vector<std::string> expect_words(std::string_view value, std::size_t n, int line) {
  auto w = words(value);
  if (w.size() != n) throw ConfigError(fmt::format("expected {} value(s), got {}", n, w.size()), line);
  return w;
}

double num(std::string_view value, int line) { return to_double(expect_words(value, 1, line)[0], line); }

int integer(std::string_view value, int line) {
  const long long v = to_int(expect_words(value, 1, line)[0], line);
  if (v < INT32_MIN || v > INT32_MAX) throw ConfigError("integer out of range", line);
  return static_cast<int>(v);
}

Vec3 vec3(std::string_view value, int line) {
  const auto w = expect_words(value, 3, line);
  return {to_double(w[0], line), to_double(w[1], line), to_double(w[2], line)};
}

Index3 idx3(std::string_view value, int line) {
  const auto w = expect_words(value, 3, line);
  Index3 out{};
  for (int a = 0; a < 3; ++a) {
    const long long v = to_int(w[static_cast<std::size_t>(a)], line);
    if (v < 0 || v > (1 << 20)) throw ConfigError("cell count out of range", line);
    out[a] = static_cast<int>(v);
  }
  return out;
}

bool boolean(std::string_view value, int line) {
  const auto w = expect_words(value, 1, line)[0];
  if (w == "true" || w == "yes" || w == "1") return true;
  if (w == "false" || w == "no" || w == "0") return false;
  throw ConfigError("expected true or false, got \"" + w + "\"", line);
}

CellFlag region_kind(const std::string& w, int line) {
  if (w == "inlet") return CellFlag::Inlet;
  if (w == "outlet") return CellFlag::Outlet;
  if (w == "wall") return CellFlag::Wall;
  if (w == "blocked") return CellFlag::Blocked;
  throw ConfigError("unknown region kind \"" + w + "\"", line);
}

using Setter = std::function<void(RunConfig&, std::string_view, int)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"grid.origin", [](RunConfig& c, std::string_view v, int l) { c.grid.origin = vec3(v, l); }},
      {"grid.extent", [](RunConfig& c, std::string_view v, int l) { c.grid.extent = vec3(v, l); }},
      {"grid.cells", [](RunConfig& c, std::string_view v, int l) { c.grid.cells = idx3(v, l); }},
      {"grid.region",
       [](RunConfig& c, std::string_view v, int l) {
         const auto w = expect_words(v, 7, l);
         RegionSpec r;
         r.kind = region_kind(w[0], l);
         for (int a = 0; a < 3; ++a) {
           r.lo[a] = to_double(w[static_cast<std::size_t>(1 + a)], l);
           r.hi[a] = to_double(w[static_cast<std::size_t>(4 + a)], l);
         }
         c.grid.regions.push_back(r);
       }},
      {"gas.density", [](RunConfig& c, std::string_view v, int l) { c.gas.rho_g = num(v, l); }},
      {"gas.viscosity", [](RunConfig& c, std::string_view v, int l) { c.gas.mu_g = num(v, l); }},
      {"gas.p_ref", [](RunConfig& c, std::string_view v, int l) { c.gas.p_ref = num(v, l); }},
      {"gas.gravity", [](RunConfig& c, std::string_view v, int l) { c.gas.gravity = vec3(v, l); }},
      {"gas.initial_velocity", [](RunConfig& c, std::string_view v, int l) { c.initial_velocity = vec3(v, l); }},
      {"solids.enabled", [](RunConfig& c, std::string_view v, int l) { c.solids.enabled = boolean(v, l); }},
      {"solids.diameter", [](RunConfig& c, std::string_view v, int l) { c.solids.d_p = num(v, l); }},
      {"solids.density", [](RunConfig& c, std::string_view v, int l) { c.solids.rho_p = num(v, l); }},
      {"solids.weight", [](RunConfig& c, std::string_view v, int l) { c.solids.omega = num(v, l); }},
      {"solids.eps_p0", [](RunConfig& c, std::string_view v, int l) { c.solids.eps_p0 = num(v, l); }},
      {"solids.bed_lo", [](RunConfig& c, std::string_view v, int l) { c.solids.bed.lo = vec3(v, l); }},
      {"solids.bed_hi", [](RunConfig& c, std::string_view v, int l) { c.solids.bed.hi = vec3(v, l); }},
      {"solids.seed",
       [](RunConfig& c, std::string_view v, int l) {
         const long long s = to_int(expect_words(v, 1, l)[0], l);
         if (s < 0) throw ConfigError("seed must be non-negative", l);
         c.solids.seed = static_cast<std::uint64_t>(s);
       }},
      {"solids.p_s", [](RunConfig& c, std::string_view v, int l) { c.solids.stress.p_s = num(v, l); }},
      {"solids.beta", [](RunConfig& c, std::string_view v, int l) { c.solids.stress.beta = num(v, l); }},
      {"solids.eps_cp", [](RunConfig& c, std::string_view v, int l) { c.solids.stress.eps_cp = num(v, l); }},
      {"solids.alpha", [](RunConfig& c, std::string_view v, int l) { c.solids.stress.alpha = num(v, l); }},
      {"solids.e_n", [](RunConfig& c, std::string_view v, int l) { c.solids.wall.e_n = num(v, l); }},
      {"solids.e_t", [](RunConfig& c, std::string_view v, int l) { c.solids.wall.e_t = num(v, l); }},
      {"bc.inlet_velocity", [](RunConfig& c, std::string_view v, int l) { c.bc.inlet_velocity = num(v, l); }},
      {"bc.outlet_pressure", [](RunConfig& c, std::string_view v, int l) { c.bc.outlet_pressure = num(v, l); }},
      {"simple.tol",
       [](RunConfig& c, std::string_view v, int l) { c.simple.tol_continuity = c.simple.tol_momentum = num(v, l); }},
      {"simple.tol_continuity", [](RunConfig& c, std::string_view v, int l) { c.simple.tol_continuity = num(v, l); }},
      {"simple.tol_momentum", [](RunConfig& c, std::string_view v, int l) { c.simple.tol_momentum = num(v, l); }},
      {"simple.max_outer", [](RunConfig& c, std::string_view v, int l) { c.simple.max_outer = integer(v, l); }},
      {"simple.urf_mom", [](RunConfig& c, std::string_view v, int l) { c.simple.urf_mom = num(v, l); }},
      {"simple.urf_p", [](RunConfig& c, std::string_view v, int l) { c.simple.urf_p = num(v, l); }},
      {"simple.lin_tol_mom", [](RunConfig& c, std::string_view v, int l) { c.simple.lin_tol_mom = num(v, l); }},
      {"simple.lin_maxit_mom", [](RunConfig& c, std::string_view v, int l) { c.simple.lin_maxit_mom = integer(v, l); }},
      {"simple.lin_tol_p", [](RunConfig& c, std::string_view v, int l) { c.simple.lin_tol_p = num(v, l); }},
      {"simple.lin_maxit_p", [](RunConfig& c, std::string_view v, int l) { c.simple.lin_maxit_p = integer(v, l); }},
      {"simple.norm_g", [](RunConfig& c, std::string_view v, int l) { c.simple.norm_g = num(v, l); }},
      {"time.dt", [](RunConfig& c, std::string_view v, int l) { c.time.dt = num(v, l); }},
      {"time.dt_min", [](RunConfig& c, std::string_view v, int l) { c.time.dt_min = num(v, l); }},
      {"time.dt_max", [](RunConfig& c, std::string_view v, int l) { c.time.dt_max = num(v, l); }},
      {"time.grow_factor", [](RunConfig& c, std::string_view v, int l) { c.time.grow_factor = num(v, l); }},
      {"time.shrink_factor", [](RunConfig& c, std::string_view v, int l) { c.time.shrink_factor = num(v, l); }},
      {"time.grow_threshold", [](RunConfig& c, std::string_view v, int l) { c.time.grow_threshold = integer(v, l); }},
      {"time.t_end", [](RunConfig& c, std::string_view v, int l) { c.t_end = num(v, l); }},
      {"time.mean_discard", [](RunConfig& c, std::string_view v, int l) { c.mean_discard = num(v, l); }},
      {"parallel.devices",
       [](RunConfig& c, std::string_view v, int l) {
         c.devices = expect_words(v, 1, l)[0];
         try {
           parse_assignment(c.devices);
         } catch (const ConfigError& e) {
           throw ConfigError(e.what(), l);
         }
       }},
      {"parallel.coupling",
       [](RunConfig& c, std::string_view v, int l) {
         try {
           c.coupling = parse_coupling(expect_words(v, 1, l)[0]);
         } catch (const ConfigError& e) {
           throw ConfigError(e.what(), l);
         }
       }},
      {"output.dir", [](RunConfig& c, std::string_view v, int l) { c.output.dir = expect_words(v, 1, l)[0]; }},
      {"output.dump_interval", [](RunConfig& c, std::string_view v, int l) { c.output.dump_interval = num(v, l); }},
      {"output.probe", [](RunConfig& c, std::string_view v, int l) { c.output.probes.push_back(vec3(v, l)); }},
      {"output.probe_interval", [](RunConfig& c, std::string_view v, int l) { c.output.probe_interval = num(v, l); }},
  };
  return table;
}

const std::set<std::string> kRepeatable = {"grid.region", "output.probe"};
const std::vector<std::string> kRequired = {"grid.extent", "grid.cells"};

}  // namespace

RunConfig parse_config_text(std::string_view text) {
  RunConfig cfg;
  std::string section;
  std::map<std::string, int> seen;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError("malformed section header", line);
      section = trim(s.substr(1, s.size() - 2));
      static const std::set<std::string> sections = {"grid", "gas", "solids", "bc", "simple", "time", "parallel", "output"};
      if (!sections.count(section)) throw ConfigError("unknown section [" + section + "]", line);
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("expected key = value", line);
    if (section.empty()) throw ConfigError("key outside of a section", line);
    const std::string key = section + "." + trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError("unknown key " + key, line);
    if (seen.count(key) && !kRepeatable.count(key))
      throw ConfigError(fmt::format("duplicate key {} (first on line {})", key, seen[key]), line);
    seen.emplace(key, line);
    it->second(cfg, value, line);
  }
  std::vector<std::string> missing;
  for (const auto& k : kRequired)
    if (!seen.count(k)) missing.push_back(k);
  if (!missing.empty()) {
    std::string list;
    for (const auto& k : missing) list += (list.empty() ? "" : ", ") + k;
    throw ConfigError("missing required keys: " + list);
  }
  validate(cfg);
  return cfg;
}

RunConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

void validate(const RunConfig& c) {
  if (!(c.gas.rho_g > 0.0) || !(c.gas.mu_g > 0.0)) throw ConfigError("gas density and viscosity must be positive");
  try {
    build_grid(c.grid);
  } catch (const GeometryError& e) {
    throw ConfigError(std::string("grid: ") + e.what());
  }
  const bool inlet = std::any_of(c.grid.regions.begin(), c.grid.regions.end(),
                                 [](const RegionSpec& r) { return r.kind == CellFlag::Inlet; });
  if (inlet != c.bc.inlet_velocity.has_value())
    throw ConfigError(inlet ? "inlet region without bc.inlet_velocity" : "bc.inlet_velocity without an inlet region");
  const SolidsConfig& s = c.solids;
  if (s.enabled) {
    if (!(s.d_p > 0.0) || !(s.rho_p > 0.0) || !(s.omega >= 1.0))
      throw ConfigError("solids need diameter > 0, density > 0 and weight >= 1");
    const StressParams& p = s.stress;
    if (!(p.p_s > 0.0) || !(p.beta >= 2.0) || !(p.eps_cp > 0.0 && p.eps_cp < 1.0) || !(p.alpha > 0.0 && p.alpha < 1.0))
      throw ConfigError("stress parameters need p_s > 0, beta >= 2, 0 < eps_cp < 1, 0 < alpha < 1");
    if (!(s.eps_p0 > 0.0 && s.eps_p0 < p.eps_cp)) throw ConfigError("eps_p0 must lie in (0, eps_cp)");
    if (!(s.wall.e_n >= 0.0 && s.wall.e_n <= 1.0) || !(s.wall.e_t >= 0.0 && s.wall.e_t <= 1.0))
      throw ConfigError("restitution coefficients must lie in [0, 1]");
    for (int a = 0; a < 3; ++a) {
      const double lo = c.grid.origin[a];
      const double hi = lo + c.grid.extent[a];
      if (!(s.bed.lo[a] >= lo && s.bed.hi[a] <= hi && s.bed.lo[a] < s.bed.hi[a]))
        throw ConfigError("bed region must be a non-empty box inside the domain");
    }
  }
  c.simple.validate();
  c.time.validate();
  if (c.t_end < 0.0 || c.mean_discard < 0.0) throw ConfigError("t_end and mean_discard must be non-negative");
  if (!(c.output.probe_interval > 0.0) || c.output.dump_interval < 0.0)
    throw ConfigError("output intervals must be positive");
  for (const Vec3& p : c.output.probes) {
    for (int a = 0; a < 3; ++a) {
      if (!(p[a] >= c.grid.origin[a] && p[a] <= c.grid.origin[a] + c.grid.extent[a]))
        throw ConfigError("probe point outside the domain");
    }
  }
  parse_assignment(c.devices);
}

namespace {

std::string g17(double v) { return fmt::format("{:.17g}", v); }
std::string v3(const Vec3& v) { return fmt::format("{:.17g} {:.17g} {:.17g}", v[0], v[1], v[2]); }

}  // namespace

std::string echo_config(const RunConfig& c) {
  std::string o;
  auto kv = [&](const char* k, const std::string& v) { o += fmt::format("{} = {}\n", k, v); };
  o += "[grid]\n";
  kv("origin", v3(c.grid.origin));
  kv("extent", v3(c.grid.extent));
  kv("cells", fmt::format("{} {} {}", c.grid.cells[0], c.grid.cells[1], c.grid.cells[2]));
  for (const RegionSpec& r : c.grid.regions) kv("region", fmt::format("{} {} {}", to_string(r.kind), v3(r.lo), v3(r.hi)));
  o += "\n[gas]\n";
  kv("density", g17(c.gas.rho_g));
  kv("viscosity", g17(c.gas.mu_g));
  kv("p_ref", g17(c.gas.p_ref));
  kv("gravity", v3(c.gas.gravity));
  kv("initial_velocity", v3(c.initial_velocity));
  o += "\n[solids]\n";
  kv("enabled", c.solids.enabled ? "true" : "false");
  kv("diameter", g17(c.solids.d_p));
  kv("density", g17(c.solids.rho_p));
  kv("weight", g17(c.solids.omega));
  kv("eps_p0", g17(c.solids.eps_p0));
  kv("bed_lo", v3(c.solids.bed.lo));
  kv("bed_hi", v3(c.solids.bed.hi));
  kv("seed", std::to_string(c.solids.seed));
  kv("p_s", g17(c.solids.stress.p_s));
  kv("beta", g17(c.solids.stress.beta));
  kv("eps_cp", g17(c.solids.stress.eps_cp));
  kv("alpha", g17(c.solids.stress.alpha));
  kv("e_n", g17(c.solids.wall.e_n));
  kv("e_t", g17(c.solids.wall.e_t));
  o += "\n[bc]\n";
  if (c.bc.inlet_velocity) kv("inlet_velocity", g17(*c.bc.inlet_velocity));
  kv("outlet_pressure", g17(c.bc.outlet_pressure));
  o += "\n[simple]\n";
  kv("tol_continuity", g17(c.simple.tol_continuity));
  kv("tol_momentum", g17(c.simple.tol_momentum));
  kv("max_outer", std::to_string(c.simple.max_outer));
  kv("urf_mom", g17(c.simple.urf_mom));
  kv("urf_p", g17(c.simple.urf_p));
  kv("lin_tol_mom", g17(c.simple.lin_tol_mom));
  kv("lin_maxit_mom", std::to_string(c.simple.lin_maxit_mom));
  kv("lin_tol_p", g17(c.simple.lin_tol_p));
  kv("lin_maxit_p", std::to_string(c.simple.lin_maxit_p));
  kv("norm_g", g17(c.simple.norm_g));
  o += "\n[time]\n";
  kv("dt", g17(c.time.dt));
  kv("dt_min", g17(c.time.dt_min));
  kv("dt_max", g17(c.time.dt_max));
  kv("grow_factor", g17(c.time.grow_factor));
  kv("shrink_factor", g17(c.time.shrink_factor));
  kv("grow_threshold", std::to_string(c.time.grow_threshold));
  kv("t_end", g17(c.t_end));
  kv("mean_discard", g17(c.mean_discard));
  o += "\n[parallel]\n";
  kv("devices", c.devices);
  kv("coupling", to_string(c.coupling));
  o += "\n[output]\n";
  kv("dir", c.output.dir);
  kv("dump_interval", g17(c.output.dump_interval));
  for (const Vec3& p : c.output.probes) kv("probe", v3(p));
  kv("probe_interval", g17(c.output.probe_interval));
  return o;
}

SimulationSetup make_simulation(const RunConfig& cfg) {
  validate(cfg);
  SimulationSetup sim;
  sim.setup.mesh = build_grid(cfg.grid);
  sim.setup.gas = cfg.gas;
  sim.setup.bc = cfg.bc;
  sim.setup.stress = cfg.solids.stress;
  sim.setup.wall = cfg.solids.wall;
  ParcelSet parcels;
  if (cfg.solids.enabled) {
    parcels = populate_bed(cfg.solids.bed, cfg.solids.eps_p0, cfg.solids.d_p, cfg.solids.rho_p, cfg.solids.omega,
                           cfg.solids.seed);
  }
  sim.initial = initial_state(sim.setup, std::move(parcels), cfg.initial_velocity);
  sim.assignment = parse_assignment(cfg.devices);
  sim.mode = cfg.coupling;
  sim.simple = cfg.simple;
  sim.time = cfg.time;
  sim.output.dir = cfg.output.dir;
  sim.output.dump_interval = cfg.output.dump_interval;
  sim.output.probes = cfg.output.probes;
  sim.output.probe_interval = cfg.output.probe_interval;
  sim.output.mean_discard = cfg.mean_discard;
  return sim;
}

}  // namespace mppic
