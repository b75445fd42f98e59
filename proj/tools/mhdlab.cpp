// mhdlab: command-line entry point for simulations, ODE lifespan sweeps, verification suites
// and report export.

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "mhdblow/scenario.hpp"

namespace {

struct Flags {
  unsigned threads = 1;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output;
  bool quiet = false;
};

int execute(const std::string& path, mhdblow::Mode mode, const Flags& f) {
  mhdblow::RunConfig cfg;
  try {
    cfg = mhdblow::parse_config(path, mode);
  } catch (const mhdblow::DomainError& e) {
    throw mhdblow::ConfigError(path + ": " + e.what());
  }
  cfg.threads = f.threads;
  if (f.seed) cfg.seed = *f.seed;
  if (f.output) cfg.output_dir = *f.output;
  const auto out = mhdblow::run_scenario(cfg);
  if (!f.quiet) {
    for (const auto& line : out.summary) std::cout << line << "\n";
    std::size_t fails = 0;
    for (const auto& r : out.checks) fails += r.verdict == mhdblow::Verdict::fail;
    std::cout << out.checks.size() << " checks, " << fails << " failed; artifacts in "
              << cfg.output_dir << "\n";
  }
  return out.exit_code;
}

std::string defaults_footer() {
  mhdblow::RunConfig def;
  return "\nExit codes: 0 pass, 1 verification failure, 2 configuration error, 3 runtime/I-O "
         "error.\n\nConfig keys and their defaults (unknown keys are rejected):\n\n" +
         mhdblow::resolved_config_text(def);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Axisymmetric compressible MHD blow-up lab"};
  app.set_version_flag("--version", mhdblow::kVersion);
  app.require_subcommand(1);
  app.fallthrough();
  app.footer(defaults_footer());

  Flags flags;
  app.add_option("--threads", flags.threads, "Worker threads")->default_val(1)->check(CLI::Range(1u, 1024u));
  app.add_option("--seed", flags.seed, "Seed for randomized checks (overrides verify.seed, default 0)");
  app.add_option("--output", flags.output, "Output directory (overrides output.directory)");
  app.add_flag("--quiet", flags.quiet, "Suppress stdout summary");

  std::string config, report_dir, target;
  auto* sim = app.add_subcommand("simulate", "Run the finite-volume solver and diagnostics");
  sim->add_option("config", config, "Config file")->required();
  auto* sweep = app.add_subcommand("ode-sweep", "Lifespan sweep over epsilon for a reduced ODE");
  sweep->add_option("config", config, "Config file")->required();
  auto* verify = app.add_subcommand("verify", "Run the test-function and/or operator suites");
  verify->add_option("suite", target, "operators | testfn | all")
      ->required()
      ->check(CLI::IsMember({"operators", "testfn", "all"}));
  verify->add_option("config", config, "Config file")->required();
  auto* report = app.add_subcommand("report", "Summarize report.txt and fit.txt in a run directory");
  report->add_option("dir", report_dir, "Run output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : mhdblow::kExitConfig;
  }

  try {
    if (*report) {
      const auto text = mhdblow::export_report(report_dir);
      if (!flags.quiet) std::cout << text;
      return text.find(" FAIL ") == std::string::npos ? mhdblow::kExitPass : mhdblow::kExitVerifyFail;
    }
    mhdblow::Mode mode = mhdblow::Mode::simulate;
    if (*sweep) mode = mhdblow::Mode::ode_sweep;
    if (*verify)
      mode = target == "operators" ? mhdblow::Mode::verify_operators
             : target == "testfn"  ? mhdblow::Mode::verify_testfn
                                   : mhdblow::Mode::verify_all;
    return execute(config, mode, flags);
  } catch (const mhdblow::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return mhdblow::kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return mhdblow::kExitRuntime;
  }
}
