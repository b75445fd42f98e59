#pragma once
// Strict parser for the TOML subset used by run configs: [section] headers, `key = value`
// with numbers, booleans, double-quoted strings and flat numeric arrays, and # comments.
// Unknown sections or keys are errors; every error carries the line number and key path.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "mhdblow/common.hpp"
#include "mhdblow/ode_lab.hpp"
#include "mhdblow/run.hpp"

namespace mhdblow {

struct TomlValue {
  std::variant<double, bool, std::string, std::vector<double>> v;
  int line = 0;
};

class TomlDoc {
 public:
  static TomlDoc parse(const std::string& text, const std::string& source = "config") {
    TomlDoc doc;
    doc.source_ = source;
    std::istringstream in(text);
    std::string raw, section;
    int line = 0;
    while (std::getline(in, raw)) {
      ++line;
      const std::string s = trim(strip_comment(raw));
      if (s.empty()) continue;
      if (s.front() == '[') {
        if (s.back() != ']' || s.size() < 3) doc.fail(line, "", "malformed section header");
        section = trim(s.substr(1, s.size() - 2));
        if (!valid_name(section)) doc.fail(line, section, "invalid section name");
        continue;
      }
      const auto eq = s.find('=');
      if (eq == std::string::npos) doc.fail(line, "", "expected `key = value`");
      const std::string key = trim(s.substr(0, eq));
      if (!valid_name(key)) doc.fail(line, key, "invalid key name");
      const std::string path = section.empty() ? key : section + "." + key;
      if (doc.values_.count(path)) doc.fail(line, path, "duplicate key");
      doc.values_[path] = {doc.parse_value(trim(s.substr(eq + 1)), line, path), line};
    }
    return doc;
  }

  static TomlDoc load(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot read config file: " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return parse(ss.str(), path);
  }

  bool has(const std::string& path) const { return values_.count(path) != 0; }

  double number(const std::string& path, double def) {
    auto* v = take(path);
    if (!v) return def;
    if (auto* d = std::get_if<double>(&v->v)) return *d;
    fail(v->line, path, "expected a number");
  }

  std::int64_t integer(const std::string& path, std::int64_t def) {
    auto* v = take(path);
    if (!v) return def;
    auto* d = std::get_if<double>(&v->v);
    if (!d || std::floor(*d) != *d || std::abs(*d) > 9e15) fail(v->line, path, "expected an integer");
    return static_cast<std::int64_t>(*d);
  }

  bool boolean(const std::string& path, bool def) {
    auto* v = take(path);
    if (!v) return def;
    if (auto* b = std::get_if<bool>(&v->v)) return *b;
    fail(v->line, path, "expected true or false");
  }

  std::string string(const std::string& path, const std::string& def,
                     const std::vector<std::string>& allowed = {}) {
    auto* v = take(path);
    if (!v) return def;
    auto* s = std::get_if<std::string>(&v->v);
    if (!s) fail(v->line, path, "expected a quoted string");
    if (!allowed.empty() && std::find(allowed.begin(), allowed.end(), *s) == allowed.end()) {
      std::string opts;
      for (const auto& a : allowed) opts += (opts.empty() ? "" : ", ") + a;
      fail(v->line, path, "must be one of: " + opts);
    }
    return *s;
  }

  std::vector<double> array(const std::string& path, const std::vector<double>& def) {
    auto* v = take(path);
    if (!v) return def;
    if (auto* a = std::get_if<std::vector<double>>(&v->v)) return *a;
    fail(v->line, path, "expected an array of numbers");
  }

  /// Fails with the key's line number when `ok` is false.
  void require(const std::string& path, bool ok, const std::string& constraint) const {
    if (ok) return;
    const auto it = values_.find(path);
    fail(it == values_.end() ? 0 : it->second.line, path, constraint);
  }

  /// Rejects any key that no consumer asked for.
  void reject_unconsumed() const {
    for (const auto& [path, v] : values_)
      if (!consumed_.count(path)) fail(v.line, path, "unknown key");
  }

  [[noreturn]] void fail(int line, const std::string& path, const std::string& msg) const {
    std::string where = source_;
    if (line > 0) where += ":" + std::to_string(line);
    throw ConfigError(where + ": " + (path.empty() ? "" : "`" + path + "`: ") + msg);
  }

 private:
  std::string source_;
  std::map<std::string, TomlValue> values_;
  std::set<std::string> consumed_;

  TomlValue* take(const std::string& path) {
    consumed_.insert(path);
    const auto it = values_.find(path);
    return it == values_.end() ? nullptr : &it->second;
  }

  static std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
  }

  static std::string strip_comment(const std::string& s) {
    bool in_str = false;
    for (std::size_t k = 0; k < s.size(); ++k) {
      if (s[k] == '"') in_str = !in_str;
      if (s[k] == '#' && !in_str) return s.substr(0, k);
    }
    return s;
  }

  static bool valid_name(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s)
      if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
    return true;
  }

  double parse_number(const std::string& s, int line, const std::string& path) const {
    std::size_t used = 0;
    double d = 0.0;
    try {
      d = std::stod(s, &used);
    } catch (const std::exception&) {
      fail(line, path, "cannot parse value `" + s + "`");
    }
    if (used != s.size() || !std::isfinite(d)) fail(line, path, "cannot parse value `" + s + "`");
    return d;
  }

  decltype(TomlValue::v) parse_value(const std::string& s, int line, const std::string& path) const {
    if (s.empty()) fail(line, path, "missing value");
    if (s == "true") return true;
    if (s == "false") return false;
    if (s.front() == '"') {
      if (s.size() < 2 || s.back() != '"' || s.find('"', 1) != s.size() - 1)
        fail(line, path, "unterminated or malformed string");
      return s.substr(1, s.size() - 2);
    }
    if (s.front() == '[') {
      if (s.back() != ']') fail(line, path, "unterminated array");
      std::vector<double> out;
      std::stringstream items(s.substr(1, s.size() - 2));
      std::string item;
      while (std::getline(items, item, ',')) {
        item = trim(item);
        if (item.empty()) {
          if (items.eof()) break;  // trailing comma
          fail(line, path, "empty array element");
        }
        out.push_back(parse_number(item, line, path));
      }
      return out;
    }
    return parse_number(s, line, path);
  }
};

// ---------------------------------------------------------------------------
// Run configuration

enum class Mode { simulate, ode_sweep, verify_operators, verify_testfn, verify_all };

inline const char* to_string(Mode m) {
  switch (m) {
    case Mode::simulate: return "simulate";
    case Mode::ode_sweep: return "ode-sweep";
    case Mode::verify_operators: return "verify-operators";
    case Mode::verify_testfn: return "verify-testfn";
    case Mode::verify_all: return "verify-all";
  }
  return "unknown";
}

struct OdeSweepConfig {
  SweepSystem system = SweepSystem::blowup;
  BlowupSystemParams blowup;
  OrliczParams orlicz;
  OdeControls controls;
  std::vector<double> epsilons = {0.2, 0.2779, 0.3861, 0.5365, 0.7455, 1.036, 1.439, 2.0};
};

struct VerifyConfig {
  std::size_t fields = 5;
  std::size_t points = 20;
  std::vector<double> steps = {1e-2, 5e-3, 2.5e-3};
  double min_order = 1.9;
  std::size_t testfn_samples = 1000;
  std::size_t n_polar = 64;
  std::size_t n_azimuth = 128;
};

struct RunConfig {
  Mode mode = Mode::simulate;
  SimulationConfig sim;
  OdeSweepConfig sweep;
  VerifyConfig verify;
  std::string output_dir = "out";
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

namespace detail {

inline std::string fmt(double v) { return format_double(v); }

inline std::string fmt(const std::vector<double>& v) {
  std::string s = "[";
  for (std::size_t k = 0; k < v.size(); ++k) s += (k ? ", " : "") + format_double(v[k]);
  return s + "]";
}

inline std::string quoted(const std::string& s) { return "\"" + s + "\""; }

}  // namespace detail

/// Fills a RunConfig from a parsed document, consuming every key it knows and rejecting the
/// rest. `mode` comes from the subcommand; a `mode` key in the file must agree with it.
inline RunConfig build_config(TomlDoc& doc, Mode mode) {
  RunConfig c;
  c.mode = mode;
  if (doc.has("mode")) {
    const auto m = doc.string("mode", "", {"simulate", "ode-sweep", "verify-operators",
                                           "verify-testfn", "verify-all"});
    doc.require("mode", m == to_string(mode) ||
                            (mode == Mode::verify_all && m.rfind("verify", 0) == 0),
                "does not match the requested subcommand " + std::string(to_string(mode)));
  }

  // [eos]
  const double gamma = doc.number("eos.gamma", 2.0);
  doc.require("eos.gamma", gamma > 1.0, "must satisfy gamma > 1");
  const double S_bar = doc.number("eos.S_bar", 0.0);
  const double mu = doc.number("eos.mu", 1.0);
  doc.require("eos.mu", mu > 0.0, "must be > 0");
  if (doc.has("eos.A")) {
    const double A = doc.number("eos.A", 0.0);
    doc.require("eos.A", A > 0.0, "must be > 0");
    c.sim.eos = EosParams::raw(gamma, A, S_bar, mu);
  } else {
    c.sim.eos = EosParams::normalized(gamma, S_bar, mu);
  }

  // [grid]
  const auto nr = doc.integer("grid.nr", 64);
  const auto nz = doc.integer("grid.nz", 128);
  doc.require("grid.nr", nr >= 4, "must be >= 4");
  doc.require("grid.nz", nz >= 4, "must be >= 4");
  const double r_max = doc.number("grid.r_max", 4.0);
  const double z_half = doc.number("grid.z_half", r_max);
  doc.require("grid.r_max", r_max > 0.0, "must be > 0");
  doc.require("grid.z_half", z_half > 0.0, "must be > 0");
  c.sim.grid = Grid2D::make(static_cast<std::size_t>(nr), static_cast<std::size_t>(nz), r_max, z_half);

  // [initial]
  auto& in = c.sim.initial;
  in.epsilon = doc.number("initial.epsilon", 0.01);
  doc.require("initial.epsilon", in.epsilon >= 0.0, "must be >= 0");
  in.profile = doc.string("initial.profile", "cos2", {"cos2", "poly3"}) == "cos2"
                   ? BumpFamily::cos2
                   : BumpFamily::poly3;
  in.amp.rho = doc.number("initial.amp_rho", 1.0);
  in.amp.ur = doc.number("initial.amp_ur", 1.0);
  in.amp.uz = doc.number("initial.amp_uz", 1.0);
  in.amp.S = doc.number("initial.amp_S", 1.0);
  doc.require("initial.amp_S", in.amp.S >= 0.0, "must be >= 0 so that S(0,x) >= S_bar");
  in.amp.btheta = doc.number("initial.amp_btheta", 1.0);
  in.support_radius = doc.number("initial.support_radius", 1.0);
  doc.require("initial.support_radius", in.support_radius > 0.0 && in.support_radius <= 1.0,
              "must lie in (0, 1]");

  // [numerics]
  auto& nm = c.sim.numerics;
  nm.cfl = doc.number("numerics.cfl", 0.5);
  doc.require("numerics.cfl", nm.cfl > 0.0 && nm.cfl <= 1.0, "must lie in (0, 1]");
  nm.t_end = doc.number("numerics.t_end", 1.0);
  doc.require("numerics.t_end", nm.t_end >= 0.0, "must be >= 0");
  nm.reconstruction = doc.string("numerics.reconstruction", "first", {"first", "muscl"}) == "first"
                          ? Reconstruction::first_order
                          : Reconstruction::muscl_minmod;
  nm.integrator = doc.string("numerics.integrator", "euler", {"euler", "heun"}) == "euler"
                      ? TimeIntegrator::euler
                      : TimeIntegrator::heun;
  nm.fixed_dt = doc.number("numerics.fixed_dt", 0.0);
  doc.require("numerics.fixed_dt", nm.fixed_dt >= 0.0, "must be >= 0 (0 selects the CFL step)");
  nm.boundary_threshold = doc.number("numerics.boundary_threshold", 1e-10);
  doc.require("numerics.boundary_threshold", nm.boundary_threshold > 0.0, "must be > 0");
  const auto max_steps = doc.integer("numerics.max_steps", 10'000'000);
  doc.require("numerics.max_steps", max_steps >= 1, "must be >= 1");
  nm.max_steps = static_cast<std::size_t>(max_steps);

  // [diagnostics]
  auto& dg = c.sim.diagnostics;
  dg.cadence = doc.number("diagnostics.cadence", 0.05);
  doc.require("diagnostics.cadence", dg.cadence > 0.0, "must be > 0");
  dg.structure.entropy = doc.number("diagnostics.entropy_tol", 1e-8);
  dg.structure.mass_relative = doc.number("diagnostics.mass_tol", 1e-10);
  dg.structure.support_threshold = doc.number("diagnostics.support_threshold", 1e-12);
  dg.btheta_tol = doc.number("diagnostics.btheta_tol", 1e-10);
  dg.pressure_tol = doc.number("diagnostics.pressure_tol", 1e-10);
  dg.dy1_c1 = doc.number("diagnostics.dy1_c1", 0.0);
  dg.dy1_c2 = doc.number("diagnostics.dy1_c2", 0.0);
  for (const char* k : {"diagnostics.entropy_tol", "diagnostics.mass_tol",
                        "diagnostics.support_threshold", "diagnostics.btheta_tol",
                        "diagnostics.pressure_tol", "diagnostics.dy1_c1", "diagnostics.dy1_c2"})
    doc.require(k, doc.number(k, 0.0) >= 0.0, "must be >= 0");

  // [output]
  c.output_dir = doc.string("output.directory", "out");
  c.sim.snapshot_times = doc.array("output.snapshot_times", {});

  // [ode]
  auto& sw = c.sweep;
  sw.system = doc.string("ode.system", "blowup", {"blowup", "orlicz"}) == "blowup"
                  ? SweepSystem::blowup
                  : SweepSystem::orlicz;
  sw.blowup.n = static_cast<int>(doc.integer("ode.n", 3));
  doc.require("ode.n", sw.blowup.n >= 1 && sw.blowup.n <= 3, "must be 1, 2 or 3");
  sw.blowup.C = doc.number("ode.C", 1.0);
  doc.require("ode.C", sw.blowup.C > 0.0, "must be > 0");
  sw.blowup.R0 = doc.number("ode.R0", 1.0);
  doc.require("ode.R0", sw.blowup.R0 > 0.0, "must be > 0");
  sw.blowup.X0 = doc.number("ode.X0", 0.5);
  sw.blowup.Y0 = doc.number("ode.Y0", 0.5);
  doc.require("ode.Y0", sw.blowup.X0 + sw.blowup.Y0 > 0.0, "ode.X0 + ode.Y0 must be > 0");
  sw.orlicz.gamma = doc.number("ode.gamma", 1.5);
  doc.require("ode.gamma", sw.orlicz.gamma > 1.0 && sw.orlicz.gamma <= 2.0, "must lie in (1, 2]");
  sw.orlicz.beta = sw.orlicz.gamma - 1.0;
  sw.orlicz.lambda = doc.number("ode.lambda", 1.0);
  doc.require("ode.lambda", sw.orlicz.lambda >= 0.0 && sw.orlicz.lambda <= 1.0, "must lie in [0, 1]");
  sw.orlicz.alpha = doc.number("ode.alpha", 1.0);
  doc.require("ode.alpha", sw.orlicz.alpha > 0.0, "must be > 0");
  sw.orlicz.kappa = doc.number("ode.kappa", 1.0);
  doc.require("ode.kappa", sw.orlicz.kappa > 0.0, "must be > 0");
  sw.orlicz.damping = doc.number("ode.damping", 1.0);
  doc.require("ode.damping", sw.orlicz.damping >= 0.0, "must be >= 0");
  sw.orlicz.I0p = doc.number("ode.I0p", 0.0);
  doc.require("ode.I0p", sw.orlicz.I0p >= 0.0, "must be >= 0");
  sw.epsilons = doc.array("ode.epsilons", sw.epsilons);
  doc.require("ode.epsilons", sw.epsilons.size() >= 6, "needs at least 6 values");
  sw.controls.rtol = doc.number("ode.rtol", 1e-10);
  sw.controls.atol = doc.number("ode.atol", 1e-14);
  sw.controls.horizon = doc.number("ode.horizon", 1e15);
  sw.controls.blowup_threshold = doc.number("ode.blowup_threshold", 1e12);
  sw.controls.collapse_rel = doc.number("ode.collapse_rel", 1e-14);
  for (const char* k : {"ode.rtol", "ode.atol", "ode.horizon", "ode.blowup_threshold",
                        "ode.collapse_rel"})
    doc.require(k, doc.number(k, 1.0) > 0.0, "must be > 0");
  sw.controls.store_every = 0;

  // [verify]
  auto& vf = c.verify;
  c.seed = static_cast<std::uint64_t>(doc.integer("verify.seed", 0));
  vf.fields = static_cast<std::size_t>(doc.integer("verify.fields", 5));
  vf.points = static_cast<std::size_t>(doc.integer("verify.points", 20));
  doc.require("verify.fields", vf.fields >= 1, "must be >= 1");
  doc.require("verify.points", vf.points >= 1, "must be >= 1");
  vf.steps = doc.array("verify.steps", vf.steps);
  doc.require("verify.steps", vf.steps.size() >= 2, "needs at least 2 steps");
  vf.min_order = doc.number("verify.min_order", 1.9);
  vf.testfn_samples = static_cast<std::size_t>(doc.integer("verify.testfn_samples", 1000));
  vf.n_polar = static_cast<std::size_t>(doc.integer("verify.n_polar", 64));
  vf.n_azimuth = static_cast<std::size_t>(doc.integer("verify.n_azimuth", 128));
  doc.require("verify.n_polar", vf.n_polar >= 2, "must be >= 2");
  doc.require("verify.n_azimuth", vf.n_azimuth >= 4, "must be >= 4");

  doc.reject_unconsumed();

  if (mode == Mode::simulate) {
    const double need = nm.t_end + 1.0 + 0.1;
    doc.require("grid.r_max", r_max >= need && z_half >= need,
                "finite-speed containment requires r_max and z_half >= t_end + 1 + 0.1 = " +
                    detail::fmt(need));
    if (nm.fixed_dt > 0.0)
      doc.require("numerics.fixed_dt", nm.fixed_dt <= nm.cfl * std::min(c.sim.grid.dr, c.sim.grid.dz),
                  "exceeds cfl * min(dr, dz)");
    validate(c.sim);
  }
  return c;
}

inline RunConfig parse_config(const std::string& path, Mode mode) {
  auto doc = TomlDoc::load(path);
  return build_config(doc, mode);
}

inline RunConfig parse_config_text(const std::string& text, Mode mode) {
  auto doc = TomlDoc::parse(text);
  return build_config(doc, mode);
}

/// Every key with its resolved value, in a form parse_config accepts.
inline std::string resolved_config_text(const RunConfig& c) {
  using detail::fmt;
  using detail::quoted;
  std::ostringstream o;
  const auto& s = c.sim;
  o << "mode = " << quoted(to_string(c.mode)) << "\n\n[eos]\n"
    << "gamma = " << fmt(s.eos.gamma) << "\nS_bar = " << fmt(s.eos.S_bar)
    << "\nmu = " << fmt(s.eos.mu) << "\nA = " << fmt(s.eos.A) << "\n\n[grid]\n"
    << "nr = " << s.grid.nr << "\nnz = " << s.grid.nz << "\nr_max = " << fmt(s.grid.r_max)
    << "\nz_half = " << fmt(s.grid.z_half) << "\n\n[initial]\n"
    << "epsilon = " << fmt(s.initial.epsilon) << "\nprofile = " << quoted(to_string(s.initial.profile))
    << "\namp_rho = " << fmt(s.initial.amp.rho) << "\namp_ur = " << fmt(s.initial.amp.ur)
    << "\namp_uz = " << fmt(s.initial.amp.uz) << "\namp_S = " << fmt(s.initial.amp.S)
    << "\namp_btheta = " << fmt(s.initial.amp.btheta)
    << "\nsupport_radius = " << fmt(s.initial.support_radius) << "\n\n[numerics]\n"
    << "cfl = " << fmt(s.numerics.cfl) << "\nt_end = " << fmt(s.numerics.t_end)
    << "\nreconstruction = "
    << quoted(s.numerics.reconstruction == Reconstruction::first_order ? "first" : "muscl")
    << "\nintegrator = " << quoted(s.numerics.integrator == TimeIntegrator::euler ? "euler" : "heun")
    << "\nfixed_dt = " << fmt(s.numerics.fixed_dt)
    << "\nboundary_threshold = " << fmt(s.numerics.boundary_threshold)
    << "\nmax_steps = " << s.numerics.max_steps << "\n\n[diagnostics]\n"
    << "cadence = " << fmt(s.diagnostics.cadence)
    << "\nentropy_tol = " << fmt(s.diagnostics.structure.entropy)
    << "\nmass_tol = " << fmt(s.diagnostics.structure.mass_relative)
    << "\nsupport_threshold = " << fmt(s.diagnostics.structure.support_threshold)
    << "\nbtheta_tol = " << fmt(s.diagnostics.btheta_tol)
    << "\npressure_tol = " << fmt(s.diagnostics.pressure_tol)
    << "\ndy1_c1 = " << fmt(s.diagnostics.dy1_c1) << "\ndy1_c2 = " << fmt(s.diagnostics.dy1_c2)
    << "\n\n[output]\n"
    << "directory = " << quoted(c.output_dir) << "\nsnapshot_times = " << fmt(s.snapshot_times)
    << "\n\n[ode]\n"
    << "system = " << quoted(c.sweep.system == SweepSystem::blowup ? "blowup" : "orlicz")
    << "\nn = " << c.sweep.blowup.n << "\nC = " << fmt(c.sweep.blowup.C)
    << "\nR0 = " << fmt(c.sweep.blowup.R0) << "\nX0 = " << fmt(c.sweep.blowup.X0)
    << "\nY0 = " << fmt(c.sweep.blowup.Y0) << "\ngamma = " << fmt(c.sweep.orlicz.gamma)
    << "\nlambda = " << fmt(c.sweep.orlicz.lambda) << "\nalpha = " << fmt(c.sweep.orlicz.alpha)
    << "\nkappa = " << fmt(c.sweep.orlicz.kappa) << "\ndamping = " << fmt(c.sweep.orlicz.damping)
    << "\nI0p = " << fmt(c.sweep.orlicz.I0p) << "\nepsilons = " << fmt(c.sweep.epsilons)
    << "\nrtol = " << fmt(c.sweep.controls.rtol) << "\natol = " << fmt(c.sweep.controls.atol)
    << "\nhorizon = " << fmt(c.sweep.controls.horizon)
    << "\nblowup_threshold = " << fmt(c.sweep.controls.blowup_threshold)
    << "\ncollapse_rel = " << fmt(c.sweep.controls.collapse_rel) << "\n\n[verify]\n"
    << "seed = " << c.seed << "\nfields = " << c.verify.fields << "\npoints = " << c.verify.points
    << "\nsteps = " << fmt(c.verify.steps) << "\nmin_order = " << fmt(c.verify.min_order)
    << "\ntestfn_samples = " << c.verify.testfn_samples << "\nn_polar = " << c.verify.n_polar
    << "\nn_azimuth = " << c.verify.n_azimuth << "\n";
  return o.str();
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace mhdblow
