#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "trajgeom/geometry.hpp"
#include "trajgeom/plan.hpp"

namespace trajgeom {

// ---------------------------------------------------------------------------
// Isotropic random walk x_{t+1} = x_t + s u_t, u_t a normalized gaussian
// direction, measured against its own endpoint x_T. The pseudo-gradient is
// the step displacement x_t - x_{t+1}.

struct WalkConfig {
  std::size_t d = 50000;
  std::size_t T = 200;
  double s = 1.0;
  std::uint64_t seed = 0;
  std::size_t replicates = 20;

  // Intended regime is d >> T.
  bool dimension_warning() const { return d < 100 * T; }
};

struct WalkPoint {
  std::size_t t = 0;
  std::size_t remaining = 0;  // T - t
  double ratio = 0.0;         // mean over replicates
  double cosine = 0.0;        // mean over replicates
};

std::vector<WalkPoint> random_walk(const WalkConfig& config);

// ---------------------------------------------------------------------------
// Fixed-step gradient descent on a quadratic whose spectrum spans [mu, L].

struct ConvergenceSpec {
  double mu = 1.0;
  double L = 10.0;
  std::size_t d = 50;
  std::size_t T = 200;
  std::uint64_t seed = 0;
};

struct ConvergencePoint {
  std::size_t t = 0;
  double predicted = 0.0;  // (1 - mu^2 / L^2)^t ||w_0 - w*||^2
  double observed = 0.0;   // ||w_t - w*||^2
};

struct ConvergenceReport {
  double eta = 0.0;
  std::vector<ConvergencePoint> points;  // t = 0 .. T
  // max over t >= 1 of observed / predicted (0 / 0 counts as 0).
  double max_ratio = 0.0;
};

ConvergenceReport convergence_check(const ConvergenceSpec& spec);

// ---------------------------------------------------------------------------

// Random (w, g, w*) in dimension d: one step at the locally optimal rate,
// compared with contraction_factor(gamma) * old distance. Returns the worst
// relative deviation. Degenerate draws are redrawn.
double optimal_step_check(std::uint64_t seed, std::size_t d, std::size_t trials);

// ---------------------------------------------------------------------------

struct CounterexampleReport {
  std::vector<StepRecord> records;
  std::size_t measured = 0;  // non-degenerate records
  std::size_t negative_rsi = 0;
  std::size_t negative_gamma = 0;

  double fraction_negative_rsi() const;
  double fraction_negative_gamma() const;
};

// Full two-pass protocol (in memory) on an alm, sm or quad plan.
CounterexampleReport counterexample_run(const TrainPlan& plan);

// ---------------------------------------------------------------------------
// Report CSVs.
//   walk:        metric,t,remaining,predicted,observed  (metric: ratio|cosine,
//                predicted 1/(T-t) and (T-t)^-1/2 respectively)
//   convergence: t,predicted,observed
inline constexpr const char* kWalkFile = "walk.csv";
inline constexpr const char* kConvergenceFile = "convergence.csv";

void write_walk_csv(const std::filesystem::path& path,
                    std::span<const WalkPoint> points);
void write_convergence_csv(const std::filesystem::path& path,
                           const ConvergenceReport& report);

}  // namespace trajgeom
