#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "trajgeom/geometry.hpp"
#include "trajgeom/hash.hpp"
#include "trajgeom/objectives.hpp"
#include "trajgeom/plan.hpp"
#include "trajgeom/vecmath.hpp"

namespace trajgeom {

// Checkpoint file: "TGW1", dim as u64 little-endian, then dim little-endian
// doubles. Exactly 12 + 8 * dim bytes.
void write_checkpoint(const std::filesystem::path& path, const ParamVector& w);
ParamVector read_checkpoint(const std::filesystem::path& path);

struct PassOneResult {
  ParamVector wstar;
  HashChain chain;           // T + 1 links, w_0 .. w_T
  std::vector<double> losses;  // minibatch loss at each step
  double final_loss = 0.0;     // full training loss at w_T
  std::size_t steps = 0;
  std::size_t steps_per_epoch = 0;
};

struct PassTwoResult {
  std::vector<StepRecord> records;
  HashChain chain;
};

// Pass one: train and keep the last iterate.
PassOneResult pass_one(const TrainPlan& plan);
PassOneResult pass_one(const TrainPlan& plan, const Objective& objective);

// Pass two: replay and measure every step against wstar before its update.
// Throws ReplayMismatchError if the final iterate differs from wstar; with
// `expected` the error names the first step whose hash link differs.
PassTwoResult pass_two(const TrainPlan& plan, const ParamVector& wstar,
                       const HashChain* expected = nullptr);
PassTwoResult pass_two(const TrainPlan& plan, const Objective& objective,
                       const ParamVector& wstar,
                       const HashChain* expected = nullptr);

struct RunArtifacts {
  std::filesystem::path manifest;
  std::filesystem::path checkpoint;
  std::filesystem::path steps_csv;
  std::filesystem::path epochs_csv;
  std::vector<StepRecord> records;
  std::vector<EpochAggregate> epochs;
  double final_loss = 0.0;
  // Mean gamma over non-degenerate records, final epoch excluded.
  std::optional<double> mean_gamma;
};

inline constexpr const char* kManifestFile = "manifest.json";
inline constexpr const char* kCheckpointFile = "wstar.tgw";
inline constexpr const char* kStepsFile = "steps.csv";
inline constexpr const char* kEpochsFile = "epochs.csv";

// Both passes plus the four artifacts in plan.output_dir. On failure the
// manifest is still written, with status "incomplete" and the error.
// `config_echo` is stored verbatim under "config".
RunArtifacts run_protocol(const TrainPlan& plan,
                          const std::map<std::string, std::string>& config_echo = {});

struct ReplayReport {
  bool identical = true;
  std::optional<std::size_t> first_divergent_step;
  std::size_t steps = 0;
};

// Runs pass one twice and compares hash chains.
ReplayReport verify_replay(const TrainPlan& plan);

std::string code_version();

}  // namespace trajgeom
