#include <iostream>

#include "CLI11.hpp"
#include "cli/commands.hpp"
#include "trajgeom/protocol.hpp"

using namespace trajgeom::cli;

namespace {

void add_common(CLI::App* sub, CommandOptions& opts, bool with_jobs) {
  sub->add_option("--config", opts.config, "config file (measure also accepts a manifest.json)")
      ->required()
      ->check(CLI::ExistingFile);
  sub->add_option("--out", opts.out, "output directory");
  if (with_jobs) {
    sub->add_option("--jobs", opts.jobs, "parallel grid points")->check(CLI::PositiveNumber);
  }
  sub->add_flag("--exclude-final-epoch,!--include-final-epoch", opts.exclude_final_epoch,
                "drop the final epoch from aggregates (default on)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"trajgeom: optimization-trajectory geometry profiler"};
  app.set_version_flag("--version", trajgeom::code_version());
  app.require_subcommand(1);
  app.footer(
      "Exit status: 0 ok, 1 other failure, 2 config error, 3 divergence,\n"
      "4 replay mismatch, 5 tolerance violation.");

  CommandOptions opts;
  ReportOptions report;

  auto* measure = app.add_subcommand("measure", "two-pass measurement of one plan");
  auto* sweep = app.add_subcommand("sweep", "one protocol run per [sweep] value");
  auto* walk = app.add_subcommand("walk", "random-walk baseline check");
  auto* converge = app.add_subcommand("converge", "fixed-step linear convergence check");
  auto* counter = app.add_subcommand("counterexample", "negative RSI / gamma existence check");
  auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient check");
  auto* rep = app.add_subcommand("report", "SVG figures from run directories");

  add_common(measure, opts, false);
  add_common(sweep, opts, true);
  add_common(walk, opts, false);
  add_common(converge, opts, false);
  add_common(counter, opts, false);
  add_common(gradcheck, opts, false);

  rep->add_option("runs", report.run_dirs, "run directories containing epochs.csv")
      ->required()
      ->check(CLI::ExistingDirectory);
  rep->add_option("--metric", report.metrics, "rsi, eb, gamma, lo_lr or dist (repeatable)")
      ->delimiter(',');
  rep->add_flag("--band,!--no-band", report.band, "min-max band (default on)");
  rep->add_flag("--log", report.log_scale, "log-scale y axis");
  rep->add_option("--out", report.out, "output directory for SVG files");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (*measure) return cmd_measure(opts, std::cout, std::cerr);
  if (*sweep) return cmd_sweep(opts, std::cout, std::cerr);
  if (*walk) return cmd_walk(opts, std::cout, std::cerr);
  if (*converge) return cmd_converge(opts, std::cout, std::cerr);
  if (*counter) return cmd_counterexample(opts, std::cout, std::cerr);
  if (*gradcheck) return cmd_gradcheck(opts, std::cout, std::cerr);
  if (*rep) return cmd_report(report, std::cout, std::cerr);
  return kExitFailure;
}
