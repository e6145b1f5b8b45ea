#include "trajgeom/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "trajgeom/errors.hpp"

namespace trajgeom {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// The three inner products every quantity is built from.
struct Products {
  double gd = 0.0;  // g . diff
  double gg = 0.0;  // g . g
  double dd = 0.0;  // diff . diff
  std::size_t dim = 0;

  bool dist_degenerate() const {
    return std::sqrt(dd) < kDistanceThreshold * std::sqrt(static_cast<double>(dim));
  }
  bool grad_degenerate() const { return std::sqrt(gg) < kGradientThreshold; }
};

Products products(const ParamVector& g, const ParamVector& diff) {
  require_same_dim(g, diff);
  return {dot(g, diff), dot(g, g), dot(diff, diff), g.dim()};
}

double clamp_cosine(double c) {
  if (c > 1.0 && c <= 1.0 + kCosineSlack) return 1.0;
  if (c < -1.0 && c >= -1.0 - kCosineSlack) return -1.0;
  return c;
}

// sqrt(gg * dd) rather than sqrt(gg) * sqrt(dd): when g == diff this is
// exactly gg, so a parallel pair yields a cosine of exactly 1.
double cosine(const Products& p) {
  const double prod = p.gg * p.dd;
  if (prod > 0.0 && std::isfinite(prod)) return clamp_cosine(p.gd / std::sqrt(prod));
  return clamp_cosine(p.gd / (std::sqrt(p.gg) * std::sqrt(p.dd)));
}

}  // namespace

std::optional<double> rsi_of(const ParamVector& g, const ParamVector& diff) {
  const Products p = products(g, diff);
  if (p.dist_degenerate()) return std::nullopt;
  return p.gd / p.dd;
}

std::optional<double> eb_of(const ParamVector& g, const ParamVector& diff) {
  const Products p = products(g, diff);
  if (p.dist_degenerate()) return std::nullopt;
  return std::sqrt(p.gg) / std::sqrt(p.dd);
}

std::optional<double> gamma_of(const ParamVector& g, const ParamVector& diff) {
  const Products p = products(g, diff);
  if (p.dist_degenerate() || p.grad_degenerate()) return std::nullopt;
  return cosine(p);
}

std::optional<double> rsi(const ParamVector& g, const ParamVector& w,
                          const ParamVector& wstar) {
  return rsi_of(g, sub(w, wstar));
}

std::optional<double> eb(const ParamVector& g, const ParamVector& w,
                         const ParamVector& wstar) {
  return eb_of(g, sub(w, wstar));
}

std::optional<double> gamma(const ParamVector& g, const ParamVector& w,
                            const ParamVector& wstar) {
  return gamma_of(g, sub(w, wstar));
}

std::optional<double> lo_lr(double rsi, double eb) {
  if (!(eb > 0.0)) return std::nullopt;
  return rsi / (eb * eb);
}

Measurement measure(const ParamVector& g, const ParamVector& w,
                    const ParamVector& wstar) {
  const Products p = products(g, sub(w, wstar));
  Measurement m;
  m.dist = std::sqrt(p.dd);
  if (p.dist_degenerate()) {
    m.rsi = m.eb = m.gamma = m.lo_lr = kNaN;
    m.degenerate = true;
    return m;
  }
  m.rsi = p.gd / p.dd;
  m.eb = std::sqrt(p.gg) / m.dist;
  if (p.grad_degenerate()) {
    m.gamma = m.lo_lr = kNaN;
    m.degenerate = true;
    return m;
  }
  m.gamma = cosine(p);
  m.lo_lr = m.rsi / (m.eb * m.eb);
  return m;
}

DistanceIdentity step_distance_identity(const ParamVector& w,
                                        const ParamVector& g, double eta,
                                        const ParamVector& wstar) {
  const ParamVector stepped = axpy(-eta, g, w);
  const ParamVector after = sub(stepped, wstar);
  const ParamVector diff = sub(w, wstar);
  const auto r = rsi_of(g, diff);
  const auto e = eb_of(g, diff);
  if (!r || !e) throw Error("distance identity: w coincides with w*");
  DistanceIdentity id;
  id.lhs = dot(after, after);
  id.rhs = (1.0 - 2.0 * eta * *r + eta * eta * *e * *e) * dot(diff, diff);
  return id;
}

double contraction_factor(double gamma) {
  if (!(std::abs(gamma) <= 1.0 + kCosineSlack)) {
    throw Error("contraction_factor: |gamma| exceeds 1");
  }
  const double g = std::clamp(gamma, -1.0, 1.0);
  return std::sqrt(1.0 - g * g);
}

// ---------------------------------------------------------------------------

std::string_view to_string(Metric m) {
  switch (m) {
    case Metric::loss: return "loss";
    case Metric::lr: return "lr";
    case Metric::rsi: return "rsi";
    case Metric::eb: return "eb";
    case Metric::gamma: return "gamma";
    case Metric::lo_lr: return "lo_lr";
    case Metric::dist: return "dist";
  }
  return "?";
}

Metric parse_metric(std::string_view text) {
  for (Metric m : kAllMetrics) {
    if (to_string(m) == text) return m;
  }
  throw Error("unknown metric '" + std::string(text) +
              "' (loss|lr|rsi|eb|gamma|lo_lr|dist)");
}

double metric_value(const StepRecord& r, Metric m) {
  switch (m) {
    case Metric::loss: return r.loss;
    case Metric::lr: return r.lr;
    case Metric::rsi: return r.rsi;
    case Metric::eb: return r.eb;
    case Metric::gamma: return r.gamma;
    case Metric::lo_lr: return r.lo_lr;
    case Metric::dist: return r.dist;
  }
  return kNaN;
}

std::optional<double> kappa_hat(std::span<const StepRecord> records) {
  double max_eb = -std::numeric_limits<double>::infinity();
  double min_rsi = std::numeric_limits<double>::infinity();
  bool any = false;
  for (const auto& r : records) {
    if (r.degenerate) continue;
    any = true;
    max_eb = std::max(max_eb, r.eb);
    min_rsi = std::min(min_rsi, r.rsi);
  }
  if (!any || !(min_rsi > 0.0)) return std::nullopt;
  return max_eb / min_rsi;
}

namespace {

struct Accumulator {
  double sum = 0.0;
  double min = std::numeric_limits<double>::infinity();
  double max = -std::numeric_limits<double>::infinity();

  void add(double v) {
    sum += v;
    min = std::min(min, v);
    max = std::max(max, v);
  }
  Stats finish(std::size_t count) const {
    // Rounding in the sum can push the mean a hair outside [min, max].
    const double mean = std::clamp(sum / static_cast<double>(count), min, max);
    return {mean, min, max};
  }
};

}  // namespace

std::vector<EpochAggregate> aggregate_epochs(std::span<const StepRecord> records,
                                             bool exclude_final) {
  std::vector<EpochAggregate> out;
  std::size_t i = 0;
  while (i < records.size()) {
    const std::size_t epoch = records[i].epoch;
    std::array<Accumulator, kMetricCount> acc{};
    EpochAggregate agg;
    agg.epoch = epoch;
    for (; i < records.size() && records[i].epoch == epoch; ++i) {
      const auto& r = records[i];
      if (r.degenerate) continue;
      ++agg.count;
      for (std::size_t m = 0; m < kMetricCount; ++m) {
        acc[m].add(metric_value(r, kAllMetrics[m]));
      }
    }
    if (agg.count > 0) {
      for (std::size_t m = 0; m < kMetricCount; ++m) {
        agg.stats[m] = acc[m].finish(agg.count);
      }
    }
    out.push_back(agg);
  }
  if (exclude_final && !out.empty()) out.pop_back();
  return out;
}

std::optional<double> mean_metric(std::span<const StepRecord> records, Metric m,
                                  std::size_t first_epoch,
                                  std::size_t end_epoch) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& r : records) {
    if (r.degenerate || r.epoch < first_epoch || r.epoch >= end_epoch) continue;
    sum += metric_value(r, m);
    ++count;
  }
  if (count == 0) return std::nullopt;
  return sum / static_cast<double>(count);
}

}  // namespace trajgeom
