#pragma once
// Time-stepping driver: advances a solver state, samples diagnostics at a fixed cadence and
// writes snapshots, the time-series CSV and report.txt.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "mhdblow/diagnostics.hpp"
#include "mhdblow/solver.hpp"

namespace mhdblow {

struct NumericsConfig {
  double cfl = 0.5;
  double t_end = 1.0;
  Reconstruction reconstruction = Reconstruction::first_order;
  TimeIntegrator integrator = TimeIntegrator::euler;
  double fixed_dt = 0.0;  // > 0 replaces the CFL step; must still satisfy it
  unsigned threads = 1;
  double boundary_threshold = 1e-10;
  std::size_t max_steps = 10'000'000;
};

struct DiagnosticsConfig {
  double cadence = 0.05;
  StructureTolerances structure;
  double btheta_tol = 1e-10;
  double pressure_tol = 1e-10;
  // Y' inequality tolerance c1·Δ² + c2·h; see ToleranceBudget.
  double dy1_c1 = 0.0;
  double dy1_c2 = 0.0;
};

struct SimulationConfig {
  EosParams eos = EosParams::normalized(2.0);
  Grid2D grid = Grid2D::make(64, 128, 4.0, 4.0);
  InitialDataSpec initial;
  NumericsConfig numerics;
  DiagnosticsConfig diagnostics;
  std::vector<double> snapshot_times;
};

struct DiagnosticsRow {
  FunctionalSample f;
  double dXdt_residual = std::numeric_limits<double>::quiet_NaN();
  double mass_pert = 0.0;
  double int_btheta = 0.0;
  double support_radius = 0.0;
  double min_S = 0.0;
  double max_grad = 0.0;
};

inline constexpr const char* kTimeSeriesHeader =
    "t,X,Y,dXdt_residual,mass_pert,int_btheta,support_radius,min_S,max_grad,magnetic_term";

struct RunResult {
  InitialDataReport initial;
  std::vector<DiagnosticsRow> series;
  std::vector<FieldState> snapshots;
  std::vector<InequalityReport> reports;
  RunStatus status = RunStatus::ok;
  std::size_t steps = 0;
  double t_final = 0.0;
  double last_dt = 0.0;

  std::vector<FunctionalSample> samples() const {
    std::vector<FunctionalSample> out;
    out.reserve(series.size());
    for (const auto& r : series) out.push_back(r.f);
    return out;
  }
  bool all_pass() const {
    return std::none_of(reports.begin(), reports.end(),
                        [](const auto& r) { return r.verdict == Verdict::fail; });
  }
};

inline void validate(const SimulationConfig& c) {
  c.eos.validate();
  c.initial.validate();
  const auto& n = c.numerics;
  if (!(n.cfl > 0.0) || n.cfl > 1.0) throw ConfigError("numerics.cfl must lie in (0, 1]");
  if (!(n.t_end >= 0.0) || !std::isfinite(n.t_end)) throw ConfigError("numerics.t_end must be >= 0");
  if (n.fixed_dt < 0.0) throw ConfigError("numerics.fixed_dt must be >= 0");
  if (n.threads < 1) throw ConfigError("numerics.threads must be >= 1");
  if (!(c.diagnostics.cadence > 0.0)) throw ConfigError("diagnostics.cadence must be > 0");
  const double need = n.t_end + 1.0 + 0.1;
  if (c.grid.r_max < need || c.grid.z_half < need)
    throw ConfigError("grid.r_max and grid.z_half must be >= t_end + 1 + 0.1 (got r_max=" +
                      std::to_string(c.grid.r_max) + ", z_half=" + std::to_string(c.grid.z_half) +
                      ", t_end=" + std::to_string(n.t_end) + ")");
}

namespace detail {

inline void append_state_reports(RunResult& res, const FieldState& s, const EosParams& eos,
                                 const FunctionalQuadrature& q, const DiagnosticsConfig& dc,
                                 double mass0, double b0, const FunctionalSample& f) {
  const auto esm = check_entropy_support_mass(s, eos, q, mass0, dc.structure);
  res.reports.push_back(esm.entropy);
  res.reports.push_back(esm.support);
  res.reports.push_back(esm.mass);
  res.reports.push_back(check_btheta_conservation(s, b0, dc.btheta_tol));
  res.reports.push_back(check_pressure_inequality(s, eos, dc.pressure_tol));
  res.reports.push_back(check_magnetic_nonnegative(f));
  res.reports.push_back(check_hoelder_bound(s, q).report);
}

}  // namespace detail

/// Advances the configured initial data to t_end, or until the support reaches the boundary
/// or a blow-up candidate appears (max|∇u| > 1/(10 dt) or a non-finite value).
/// `on_sample` is called with each sampled state.
inline RunResult run(const SimulationConfig& cfg,
                     const std::function<void(const FieldState&)>& on_sample = {}) {
  validate(cfg);
  const auto& eos = cfg.eos;
  const auto& num = cfg.numerics;
  const auto& dc = cfg.diagnostics;
  SchemeOptions opt;
  opt.reconstruction = num.reconstruction;
  opt.integrator = num.integrator;
  opt.threads = num.threads;
  opt.boundary_threshold = num.boundary_threshold;

  RunResult res;
  auto init = make_initial_data(cfg.initial, cfg.grid, eos);
  res.initial = init.report;
  FieldState s = std::move(init.state);
  const FunctionalQuadrature q(s.grid);
  const double mass0 = mass_perturbation(s, q);
  const double b0 = btheta_integral(s);

  std::vector<double> snaps = cfg.snapshot_times;
  std::sort(snaps.begin(), snaps.end());
  std::size_t next_snap = 0, sample_index = 0;

  auto sample = [&](double max_grad) {
    DiagnosticsRow row;
    row.f = compute_sample(s, eos, q);
    row.mass_pert = mass_perturbation(s, q);
    row.int_btheta = btheta_integral(s);
    row.support_radius = support_radius(s, eos, dc.structure.support_threshold);
    row.min_S = min_entropy(s);
    row.max_grad = max_grad;
    res.series.push_back(row);
    detail::append_state_reports(res, s, eos, q, dc, mass0, b0, row.f);
    if (on_sample) on_sample(s);
  };
  auto take_snapshots = [&] {
    while (next_snap < snaps.size() && snaps[next_snap] <= s.time + 1e-12) {
      res.snapshots.push_back(s);
      ++next_snap;
    }
  };

  sample(max_velocity_gradient(s));
  ++sample_index;
  take_snapshots();

  while (s.time < num.t_end && res.steps < num.max_steps) {
    double dt = num.fixed_dt > 0.0 ? num.fixed_dt : cfl_dt(s, num.cfl, eos);
    if (num.fixed_dt > 0.0 && dt > cfl_dt(s, num.cfl, eos) * (1.0 + 1e-12))
      throw ConfigError("numerics.fixed_dt violates the CFL bound at t=" + std::to_string(s.time));
    double next_event = std::min(num.t_end, dc.cadence * static_cast<double>(sample_index));
    if (next_snap < snaps.size()) next_event = std::min(next_event, snaps[next_snap]);
    if (s.time + dt >= next_event - 1e-9 * dt) dt = next_event - s.time;
    auto st = step(s, dt, eos, opt);
    s = std::move(st.state);
    if (std::abs(s.time - next_event) <= 1e-12 * std::max(1.0, next_event)) s.time = next_event;
    ++res.steps;
    res.last_dt = dt;
    res.status = worst(res.status, st.status);
    double grad = std::numeric_limits<double>::infinity();
    if (res.status != RunStatus::blowup_candidate) {
      grad = max_velocity_gradient(s);
      if (grad > 1.0 / (10.0 * dt)) res.status = RunStatus::blowup_candidate;
    }
    const bool at_sample = s.time >= dc.cadence * static_cast<double>(sample_index) - 1e-12;
    if (res.status == RunStatus::blowup_candidate) break;
    if (at_sample || s.time >= num.t_end) {
      sample(grad);
      while (dc.cadence * static_cast<double>(sample_index) <= s.time + 1e-12) ++sample_index;
    }
    take_snapshots();
    if (res.status == RunStatus::support_reached_boundary) break;
  }
  res.t_final = s.time;

  // dX/dt residual at interior samples with equal spacing on both sides.
  auto& ser = res.series;
  for (std::size_t k = 1; k + 1 < ser.size(); ++k) {
    const double a = ser[k].f.t - ser[k - 1].f.t, b = ser[k + 1].f.t - ser[k].f.t;
    if (std::abs(a - b) > 1e-9 * a) continue;
    ser[k].dXdt_residual = (ser[k + 1].f.X - ser[k - 1].f.X) / (a + b) - ser[k].f.Y;
    if (dc.dy1_c1 > 0.0 || dc.dy1_c2 > 0.0) {
      std::vector<FunctionalSample> tri{ser[k - 1].f, ser[k].f, ser[k + 1].f};
      const double tol = dc.dy1_c1 * a * a + dc.dy1_c2 * s.grid.h();
      res.reports.push_back(check_dY1(tri, pressure_coefficient(eos), tol));
    }
  }
  return res;
}

// ---------------------------------------------------------------------------
// Output files

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_timeseries_csv(const std::string& path, const std::vector<DiagnosticsRow>& rows) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open for writing: " + path);
  os << kTimeSeriesHeader << '\n';
  for (const auto& r : rows) {
    const double v[] = {r.f.t,          r.f.X,      r.f.Y,        r.dXdt_residual, r.mass_pert,
                        r.int_btheta, r.support_radius, r.min_S, r.max_grad,  r.f.magnetic};
    for (std::size_t k = 0; k < std::size(v); ++k) os << (k ? "," : "") << format_double(v[k]);
    os << '\n';
  }
  if (!os) throw IoError("failed writing: " + path);
}

inline std::string report_line(const InequalityReport& r) {
  return "t=" + format_double(r.t) + " check=" + r.check + " lhs=" + format_double(r.lhs) +
         " rhs=" + format_double(r.rhs) + " margin=" + format_double(r.margin) +
         " tol=" + format_double(r.tolerance_used) + " verdict=" + to_string(r.verdict);
}

inline void write_report(const std::string& path, const std::vector<InequalityReport>& reports) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open for writing: " + path);
  for (const auto& r : reports) os << report_line(r) << '\n';
  if (!os) throw IoError("failed writing: " + path);
}

/// timeseries.csv, report.txt and snapshot_NNN.bin under `dir`.
inline void write_run_outputs(const std::string& dir, const RunResult& res) {
  std::filesystem::create_directories(dir);
  write_timeseries_csv(dir + "/timeseries.csv", res.series);
  write_report(dir + "/report.txt", res.reports);
  for (std::size_t k = 0; k < res.snapshots.size(); ++k) {
    char name[32];
    std::snprintf(name, sizeof name, "/snapshot_%03zu.bin", k);
    write_snapshot(dir + name, res.snapshots[k]);
  }
}

}  // namespace mhdblow
