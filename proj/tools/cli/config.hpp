#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "trajgeom/baselines.hpp"
#include "trajgeom/errors.hpp"
#include "trajgeom/plan.hpp"

namespace trajgeom::cli {

class ConfigError : public Error {
 public:
  ConfigError(const std::string& message, std::size_t line)
      : Error(message), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Sectioned key = value text:
//
//   # comment
//   [section]
//   key = value
//
// Sections and keys are checked against a fixed schema; unknown ones are
// errors that name the line.
class ConfigFile {
 public:
  struct Entry {
    std::string value;
    std::size_t line = 0;
  };

  static ConfigFile parse(const std::string& text, const std::string& source);
  static ConfigFile load(const std::string& path);

  bool has_section(const std::string& section) const;
  bool has(const std::string& section, const std::string& key) const;

  std::string get_string(const std::string& section, const std::string& key,
                         const std::string& fallback) const;
  double get_double(const std::string& section, const std::string& key,
                    double fallback) const;
  std::size_t get_size(const std::string& section, const std::string& key,
                       std::size_t fallback) const;
  std::uint64_t get_u64(const std::string& section, const std::string& key,
                        std::uint64_t fallback) const;
  bool get_bool(const std::string& section, const std::string& key,
                bool fallback) const;
  std::vector<std::string> get_list(const std::string& section,
                                    const std::string& key) const;
  std::vector<std::size_t> get_size_list(const std::string& section,
                                         const std::string& key) const;
  std::vector<double> get_double_list(const std::string& section,
                                      const std::string& key) const;

  // Throws ConfigError "source:line: [section] key: what", using the line of
  // the entry when it exists.
  [[noreturn]] void error_at(const std::string& section, const std::string& key,
                             const std::string& what) const;

  // "section.key" -> value, for echoing into manifests.
  std::map<std::string, std::string> flatten() const;

  const std::string& source() const { return source_; }

 private:
  const Entry* find(const std::string& section, const std::string& key) const;
  [[noreturn]] void fail(const Entry& e, const std::string& section,
                         const std::string& key, const std::string& what) const;

  std::string source_;
  std::map<std::string, std::map<std::string, Entry>> sections_;
};

// Builds a plan from [objective], [optimizer], [schedule] and [protocol].
TrainPlan plan_from_config(const ConfigFile& config);

enum class SweepAxis { batch_size, optimizer, seed, epochs };

struct SweepSpec {
  SweepAxis axis = SweepAxis::seed;
  std::vector<std::string> values;
  // Optional per-point learning rates, parallel to `values`.
  std::vector<double> lr_values;
  // batch_size only: lr * sqrt(batch / lr_base_batch).
  bool lr_sqrt_scaling = false;
  std::size_t lr_base_batch = 0;
};

std::string to_string(SweepAxis axis);
SweepSpec sweep_from_config(const ConfigFile& config);

// The plan for one grid point of a sweep.
TrainPlan sweep_point(const TrainPlan& base, const SweepSpec& sweep,
                      std::size_t index);

struct WalkCheck {
  WalkConfig walk;
  std::size_t min_remaining = 10;
  double cosine_tolerance = 0.20;
  double ratio_tolerance = 0.25;
};
WalkCheck walk_from_config(const ConfigFile& config);

struct ConvergeCheck {
  ConvergenceSpec spec;
  double tolerance = 1e-9;
};
ConvergeCheck converge_from_config(const ConfigFile& config);

struct GradCheckConfig {
  std::vector<std::string> objectives{"mlp", "alm", "alm_hinge", "sm", "quad"};
  double eps = 1e-6;
  double tolerance = 1e-5;
  std::uint64_t seed = 0;
};
GradCheckConfig gradcheck_from_config(const ConfigFile& config);

enum class CounterexampleExpectation { negative_rsi, negative_gamma, no_negative_rsi };
CounterexampleExpectation expectation_from_config(const ConfigFile& config);

}  // namespace trajgeom::cli
