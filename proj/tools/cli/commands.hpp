#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "cli/config.hpp"

namespace trajgeom::cli {

// Process exit statuses.
enum ExitStatus : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfig = 2,
  kExitDivergence = 3,
  kExitReplayMismatch = 4,
  kExitTolerance = 5,
};

struct CommandOptions {
  std::string config;
  std::optional<std::filesystem::path> out;
  std::size_t jobs = 1;
  // Unset: keep the config (or manifest) value.
  std::optional<bool> exclude_final_epoch;
};

int cmd_measure(const CommandOptions& opts, std::ostream& out, std::ostream& err);
int cmd_sweep(const CommandOptions& opts, std::ostream& out, std::ostream& err);
int cmd_walk(const CommandOptions& opts, std::ostream& out, std::ostream& err);
int cmd_converge(const CommandOptions& opts, std::ostream& out, std::ostream& err);
int cmd_counterexample(const CommandOptions& opts, std::ostream& out, std::ostream& err);
int cmd_gradcheck(const CommandOptions& opts, std::ostream& out, std::ostream& err);

struct ReportOptions {
  std::vector<std::filesystem::path> run_dirs;
  std::vector<std::string> metrics{"gamma"};
  bool band = true;
  bool log_scale = false;
  std::filesystem::path out = "figures";
};

int cmd_report(const ReportOptions& opts, std::ostream& out, std::ostream& err);

// A config file, or a manifest.json from an earlier run.
struct LoadedPlan {
  TrainPlan plan;
  std::map<std::string, std::string> echo;
};
LoadedPlan load_plan(const CommandOptions& opts);

struct GradCheckRow {
  std::string objective;
  std::size_t dim = 0;
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  bool pass = false;
};

// Small instances of each objective checked against central differences.
std::vector<GradCheckRow> run_gradcheck(const GradCheckConfig& config);

struct SweepPointResult {
  std::string value;
  std::string run_id;
  int status = kExitOk;
  std::string error;
  double final_loss = 0.0;
  std::optional<double> mean_gamma;
};

}  // namespace trajgeom::cli
