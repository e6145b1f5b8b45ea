#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "trajgeom/vecmath.hpp"

namespace trajgeom {

// Below these a measurement is degenerate rather than an error: the distance
// threshold scales with sqrt(dim).
inline constexpr double kDistanceThreshold = 1e-12;
inline constexpr double kGradientThreshold = 1e-30;
// Cosines this close outside [-1, 1] are rounding and get clamped.
inline constexpr double kCosineSlack = 1e-12;

// RSI(g, w, w*) = g.(w - w*) / ||w - w*||^2
std::optional<double> rsi(const ParamVector& g, const ParamVector& w,
                          const ParamVector& wstar);
// EB(g, w, w*) = ||g|| / ||w - w*||
std::optional<double> eb(const ParamVector& g, const ParamVector& w,
                         const ParamVector& wstar);
// cosine(g, w - w*) = RSI / EB
std::optional<double> gamma(const ParamVector& g, const ParamVector& w,
                            const ParamVector& wstar);
// Step size minimizing ||w - eta g - w*||: RSI / EB^2.
std::optional<double> lo_lr(double rsi, double eb);

// The same quantities against an explicit displacement w - w*.
std::optional<double> rsi_of(const ParamVector& g, const ParamVector& diff);
std::optional<double> eb_of(const ParamVector& g, const ParamVector& diff);
std::optional<double> gamma_of(const ParamVector& g, const ParamVector& diff);

struct Measurement {
  double rsi = 0.0;
  double eb = 0.0;
  double gamma = 0.0;
  double lo_lr = 0.0;
  double dist = 0.0;
  bool degenerate = false;
};

// Every quantity from one pair of passes over (g, w - w*). Undefined
// quantities of a degenerate measurement are NaN.
Measurement measure(const ParamVector& g, const ParamVector& w,
                    const ParamVector& wstar);

struct DistanceIdentity {
  double lhs = 0.0;  // ||w - eta g - w*||^2, stepped explicitly
  double rhs = 0.0;  // (1 - 2 eta RSI + eta^2 EB^2) ||w - w*||^2
};

DistanceIdentity step_distance_identity(const ParamVector& w,
                                        const ParamVector& g, double eta,
                                        const ParamVector& wstar);

// sqrt(1 - gamma^2). Throws Error for |gamma| > 1 + kCosineSlack.
double contraction_factor(double gamma);

// ---------------------------------------------------------------------------

struct StepRecord {
  std::string run_id;
  std::size_t t = 0;
  std::size_t epoch = 0;
  double loss = 0.0;
  double lr = 0.0;
  double rsi = 0.0;
  double eb = 0.0;
  double gamma = 0.0;
  double lo_lr = 0.0;
  double dist = 0.0;
  bool degenerate = false;
};

enum class Metric { loss, lr, rsi, eb, gamma, lo_lr, dist };
inline constexpr std::size_t kMetricCount = 7;
inline constexpr std::array<Metric, kMetricCount> kAllMetrics = {
    Metric::loss, Metric::lr,    Metric::rsi, Metric::eb,
    Metric::gamma, Metric::lo_lr, Metric::dist};

std::string_view to_string(Metric m);
Metric parse_metric(std::string_view text);
double metric_value(const StepRecord& r, Metric m);

// max EB / min RSI over non-degenerate records; nullopt when there are none
// or the smallest RSI is not positive.
std::optional<double> kappa_hat(std::span<const StepRecord> records);

struct Stats {
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
};

struct EpochAggregate {
  std::size_t epoch = 0;
  std::size_t count = 0;  // non-degenerate records
  // Empty when count == 0.
  std::array<std::optional<Stats>, kMetricCount> stats{};

  const std::optional<Stats>& operator[](Metric m) const {
    return stats[static_cast<std::size_t>(m)];
  }
};

// Per-epoch mean/min/max over non-degenerate records, which must be sorted
// by t. The last epoch present is dropped when `exclude_final` is set.
std::vector<EpochAggregate> aggregate_epochs(std::span<const StepRecord> records,
                                             bool exclude_final);

// Mean of a metric over non-degenerate records with
// first_epoch <= epoch < end_epoch.
std::optional<double> mean_metric(std::span<const StepRecord> records, Metric m,
                                  std::size_t first_epoch,
                                  std::size_t end_epoch);

}  // namespace trajgeom
