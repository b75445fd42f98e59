#pragma once
// Scenario orchestration behind the command-line tool: simulate, ode-sweep, the verification
// suites, manifest writing and the consolidated report.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "mhdblow/config.hpp"
#include "mhdblow/crosscheck.hpp"
#include "mhdblow/diagnostics.hpp"
#include "mhdblow/ode_lab.hpp"
#include "mhdblow/run.hpp"
#include "mhdblow/test_function.hpp"

namespace mhdblow {

inline constexpr const char* kVersion = "0.1.0";

/// Process exit codes.
enum ExitCode : int { kExitPass = 0, kExitVerifyFail = 1, kExitConfig = 2, kExitRuntime = 3 };

struct ScenarioOutcome {
  int exit_code = kExitPass;
  std::vector<InequalityReport> checks;
  std::vector<std::string> summary;  // human-readable lines for stdout
};

inline bool any_fail(const std::vector<InequalityReport>& r) {
  return std::any_of(r.begin(), r.end(), [](const auto& x) { return x.verdict == Verdict::fail; });
}

// ---------------------------------------------------------------------------
// Verification suites

/// Closed form vs sphere quadrature, the radial ODE F'' + 2F'/R = F, positivity of F and
/// F'', and ∇F against its quadrature.
inline std::vector<InequalityReport> verify_testfn(const VerifyConfig& v, std::uint64_t seed) {
  std::vector<InequalityReport> out;
  double worst_quad = 0.0;
  for (double R : {0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0}) {
    const Vec3 x{R * 0.48, R * 0.6, R * 0.64};  // |(0.48, 0.6, 0.64)| = 1
    const double exact = eval_profile(R).F;
    const double rel = std::abs(quad_F_oracle(x, v.n_polar, v.n_azimuth) - exact) / exact;
    worst_quad = std::max(worst_quad, rel);
  }
  out.push_back(make_report("testfn_quadrature_rel_error", 0.0, 1e-10, worst_quad, 0.0));

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 30.0);
  double worst_ode = 0.0, min_F = INFINITY, min_FRR = INFINITY;
  for (std::size_t k = 0; k < v.testfn_samples; ++k) {
    // Half the samples cluster near the origin where the series branch is used.
    const double R = k % 2 == 0 ? unif(rng) : unif(rng) / 30.0;
    const auto p = eval_profile(R);
    const double res = std::abs(p.F_RR + 2.0 * p.F_R_over_R - p.F) / std::max(1.0, p.F);
    worst_ode = std::max(worst_ode, res);
    min_F = std::min(min_F, p.F);
    min_FRR = std::min(min_FRR, p.F_RR);
  }
  out.push_back(make_report("testfn_radial_ode_residual", 0.0, 1e-9, worst_ode, 0.0));
  for (auto [name, value] : {std::pair{"testfn_F_positive", min_F}, {"testfn_F_RR_positive", min_FRR}}) {
    auto r = make_report(name, 0.0, value, 0.0, 0.0);
    if (!(value > 0.0)) r.verdict = Verdict::fail;
    out.push_back(r);
  }

  double worst_grad = 0.0;
  for (double R : {0.3, 1.0, 4.0, 12.0}) {
    const Vec3 x{R * 0.6, -R * 0.48, R * 0.64};
    const Vec3 g = grad_F(x), gq = quad_grad_F_oracle(x, v.n_polar, v.n_azimuth);
    worst_grad = std::max(worst_grad, norm(g - gq) / norm(g));
  }
  out.push_back(make_report("testfn_gradient_rel_error", 0.0, 1e-10, worst_grad, 0.0));
  return out;
}

/// Random smooth axisymmetric fields at random off-axis points: each differential operator's
/// cylindrical formula against Cartesian finite differences, reporting the smallest measured
/// convergence order; algebraic operators must agree to rounding.
inline std::vector<InequalityReport> verify_operators(const VerifyConfig& v, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ur(0.3, 1.5), uz(-1.0, 1.0), uphi(0.0, 2.0 * pi);
  std::map<CylOperator, double> min_order, max_exact;
  std::map<CylOperator, bool> is_exact;
  for (const auto op : kAllCylOperators) {
    min_order[op] = INFINITY;
    max_exact[op] = 0.0;
    is_exact[op] = true;
  }
  for (std::size_t f = 0; f < v.fields; ++f) {
    const auto field = GaussianAxisymmetricField::random(rng);
    for (std::size_t p = 0; p < v.points; ++p) {
      const double r = ur(rng), z = uz(rng), phi = uphi(rng);
      const Vec3 x{r * std::cos(phi), r * std::sin(phi), z};
      for (const auto& c : crosscheck_orders(field, x, v.steps)) {
        if (c.exact) {
          for (double d : c.discrepancies) max_exact[c.op] = std::max(max_exact[c.op], d);
        } else {
          is_exact[c.op] = false;
          min_order[c.op] = std::min(min_order[c.op], c.min_order);
        }
      }
    }
  }
  std::vector<InequalityReport> out;
  for (const auto op : kAllCylOperators) {
    if (is_exact[op])
      out.push_back(make_report("operator_exact:" + to_string(op), 0.0, 1e-12, max_exact[op], 0.0));
    else
      out.push_back(make_report("operator_order:" + to_string(op), 0.0, min_order[op], v.min_order, 0.0));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Artifacts

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open for writing: " + path);
  os << text;
  if (!os) throw IoError("failed writing: " + path);
}

inline std::string hex64(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline void write_manifest(const std::string& dir, const RunConfig& cfg) {
  const std::string resolved = resolved_config_text(cfg);
  std::ostringstream o;
  o << "mhdlab_version=" << kVersion << "\n"
    << "mode=" << to_string(cfg.mode) << "\n"
    << "config_hash=fnv1a64:" << hex64(fnv1a(resolved)) << "\n"
    << "threads=" << cfg.threads << "\n"
    << "seed=" << cfg.seed << "\n"
    << "compiler=" << __VERSION__ << "\n"
    << "cxx_standard=" << __cplusplus << "\n"
    << "\n# resolved configuration\n"
    << resolved;
  write_text(dir + "/manifest.txt", o.str());
}

inline std::string sweep_csv(const FitReport& rep) {
  std::ostringstream o;
  o << "epsilon,blowup_time,terminated_reason\n";
  for (std::size_t k = 0; k < rep.epsilons.size(); ++k)
    o << format_double(rep.epsilons[k]) << "," << format_double(rep.blowup_times[k]) << ","
      << to_string(rep.reasons[k]) << "\n";
  return o.str();
}

inline std::string fit_line(const FitReport& rep) {
  std::ostringstream o;
  o << "lifespan scaling " << rep.description << ": model="
    << (rep.model == FitModel::power_law ? "log T vs log eps" : "log T vs eps^-alpha")
    << ", slope " << format_double(rep.fit.slope) << ", intercept "
    << format_double(rep.fit.intercept) << ", R^2 " << format_double(rep.fit.r2);
  if (rep.expected_slope) o << ", expected slope " << format_double(*rep.expected_slope);
  if (!rep.warning.empty()) o << ", warning: " << rep.warning;
  return o.str();
}

// ---------------------------------------------------------------------------
// Scenarios

inline ScenarioOutcome run_simulate(const RunConfig& cfg) {
  ScenarioOutcome out;
  SimulationConfig sim = cfg.sim;
  sim.numerics.threads = cfg.threads;
  const auto res = run(sim);
  write_run_outputs(cfg.output_dir, res);
  out.checks = res.reports;
  out.summary.push_back("status " + std::string(to_string(res.status)) + " at t=" +
                        format_double(res.t_final) + " after " + std::to_string(res.steps) +
                        " steps");
  out.summary.push_back("initial X(0)=" + format_double(res.initial.X0) + " hypothesis functional=" +
                        format_double(res.initial.hypothesis));
  if (!res.initial.warning.empty()) out.summary.push_back("warning: " + res.initial.warning);
  if (!res.series.empty())
    out.summary.push_back("final X=" + format_double(res.series.back().f.X) +
                          " Y=" + format_double(res.series.back().f.Y));
  return out;
}

inline ScenarioOutcome run_ode_sweep(const RunConfig& cfg) {
  ScenarioOutcome out;
  SweepParams p;
  p.system = cfg.sweep.system;
  p.blowup = cfg.sweep.blowup;
  p.orlicz = cfg.sweep.orlicz;
  p.controls = cfg.sweep.controls;
  p.threads = cfg.threads;
  const auto rep = lifespan_sweep_fit(p, cfg.sweep.epsilons);

  // Threshold insensitivity: repeat with the detection threshold lowered by 1e6.
  auto q = p;
  q.controls.blowup_threshold = p.controls.blowup_threshold * 1e-6;
  const auto low = lifespan_sweep_fit(q, cfg.sweep.epsilons);
  for (std::size_t k = 0; k < rep.epsilons.size(); ++k) {
    const double a = rep.blowup_times[k], b = low.blowup_times[k];
    const double rel = std::isfinite(a) && std::isfinite(b) ? std::abs(a - b) / a : INFINITY;
    // The t column carries ε for sweep checks.
    out.checks.push_back(
        make_report("blowup_threshold_insensitivity", rep.epsilons[k], 1e-3, rel, 0.0));
  }
  for (std::size_t k = 0; k < rep.epsilons.size(); ++k)
    out.checks.push_back(make_report("lifespan_finite", rep.epsilons[k],
                                     std::isfinite(rep.blowup_times[k]) ? 1.0 : 0.0, 1.0, 0.0));

  std::filesystem::create_directories(cfg.output_dir);
  write_text(cfg.output_dir + "/sweep.csv", sweep_csv(rep));
  write_text(cfg.output_dir + "/fit.txt", fit_line(rep) + "\n");
  write_report(cfg.output_dir + "/report.txt", out.checks);
  out.summary.push_back(fit_line(rep));
  return out;
}

inline ScenarioOutcome run_verify(const RunConfig& cfg) {
  ScenarioOutcome out;
  if (cfg.mode == Mode::verify_testfn || cfg.mode == Mode::verify_all)
    for (auto& r : verify_testfn(cfg.verify, cfg.seed)) out.checks.push_back(std::move(r));
  if (cfg.mode == Mode::verify_operators || cfg.mode == Mode::verify_all)
    for (auto& r : verify_operators(cfg.verify, cfg.seed)) out.checks.push_back(std::move(r));
  std::filesystem::create_directories(cfg.output_dir);
  write_report(cfg.output_dir + "/report.txt", out.checks);
  for (const auto& r : out.checks) out.summary.push_back(report_line(r));
  return out;
}

/// Dispatches on cfg.mode, writes artifacts and manifest.txt under cfg.output_dir and sets
/// the exit code to 1 when any check fails.
inline ScenarioOutcome run_scenario(const RunConfig& cfg) {
  ScenarioOutcome out;
  switch (cfg.mode) {
    case Mode::simulate: out = run_simulate(cfg); break;
    case Mode::ode_sweep: out = run_ode_sweep(cfg); break;
    default: out = run_verify(cfg); break;
  }
  write_manifest(cfg.output_dir, cfg);
  out.exit_code = any_fail(out.checks) ? kExitVerifyFail : kExitPass;
  return out;
}

// ---------------------------------------------------------------------------
// Consolidated report

inline std::string check_family(const std::string& check) {
  auto starts = [&](const char* p) { return check.rfind(p, 0) == 0; };
  if (starts("dXdt") || starts("testfn") || starts("operator")) return "identities";
  if (starts("mass") || starts("btheta") || starts("support")) return "conservation";
  if (starts("lifespan") || starts("blowup")) return "scalings";
  return "inequalities";
}

namespace detail {

inline std::map<std::string, std::string> parse_report_line(const std::string& line) {
  std::map<std::string, std::string> kv;
  std::istringstream is(line);
  std::string tok;
  while (is >> tok) {
    const auto eq = tok.find('=');
    if (eq != std::string::npos) kv[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  return kv;
}

}  // namespace detail

/// Summarizes report.txt (and fit.txt when present) in `dir` into one table per check family
/// with pass/fail counts and the worst margin, writes it to summary.txt and returns it.
inline std::string export_report(const std::string& dir) {
  const std::string report = dir + "/report.txt", fit = dir + "/fit.txt";
  if (!std::filesystem::exists(report)) throw IoError("missing artifact: " + report);
  std::ifstream is(report);
  if (!is) throw IoError("cannot read: " + report);

  struct Row {
    std::size_t pass = 0, fail = 0, na = 0;
    double worst_margin = INFINITY, worst_t = 0.0;
  };
  std::map<std::string, std::map<std::string, Row>> fam;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto kv = detail::parse_report_line(line);
    if (!kv.count("check") || !kv.count("verdict") || !kv.count("margin"))
      throw IoError(report + ":" + std::to_string(lineno) + ": malformed report line");
    auto& row = fam[check_family(kv["check"])][kv["check"]];
    const auto& v = kv["verdict"];
    if (v == "pass") ++row.pass;
    else if (v == "fail") ++row.fail;
    else ++row.na;
    if (v != "n/a") {
      const double m = std::stod(kv["margin"]);
      if (m < row.worst_margin) row.worst_margin = m, row.worst_t = std::stod(kv["t"]);
    }
  }

  std::ostringstream o;
  for (const char* f : {"identities", "inequalities", "conservation", "scalings"}) {
    if (!fam.count(f) && !(std::string(f) == "scalings" && std::filesystem::exists(fit))) continue;
    o << "== " << f << " ==\n";
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-40s %6s %6s %6s  %-6s %-24s %s\n", "check", "pass", "fail",
                  "n/a", "result", "worst margin", "at t");
    o << buf;
    for (const auto& [name, r] : fam[f]) {
      std::snprintf(buf, sizeof buf, "%-40s %6zu %6zu %6zu  %-6s %-24s %s\n", name.c_str(), r.pass,
                    r.fail, r.na, r.fail ? "FAIL" : "pass",
                    std::isfinite(r.worst_margin) ? format_double(r.worst_margin).c_str() : "-",
                    format_double(r.worst_t).c_str());
      o << buf;
    }
    if (std::string(f) == "scalings" && std::filesystem::exists(fit)) {
      std::ifstream fs(fit);
      while (std::getline(fs, line))
        if (!line.empty()) o << line << "\n";
    }
    o << "\n";
  }
  const std::string text = o.str();
  write_text(dir + "/summary.txt", text);
  return text;
}

}  // namespace mhdblow
