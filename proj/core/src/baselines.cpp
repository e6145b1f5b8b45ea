#include "trajgeom/baselines.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "trajgeom/errors.hpp"
#include "trajgeom/protocol.hpp"
#include "trajgeom/random.hpp"
#include "trajgeom/records_io.hpp"

namespace trajgeom {

// ---------------------------------------------------------------------------
// Random walk
//
// With S_t = u_t + ... + u_{T-1} the walk gives x_t - x_{t+1} = -s u_t and
// x_t - x_T = -s S_t, so each replicate is swept backwards from t = T - 1 and
// only S_t is kept. Step t of replicate r draws from the "walk" stream derived
// with r and then t, so the sweep order does not change the directions.

std::vector<WalkPoint> random_walk(const WalkConfig& config) {
  if (config.d == 0 || config.T == 0) throw Error("random walk: d and T must be positive");
  if (!(config.s > 0.0)) throw Error("random walk: step size must be positive");
  if (config.replicates == 0) throw Error("random walk: need at least one replicate");

  const std::size_t T = config.T;
  std::vector<double> ratio_sum(T, 0.0), cos_sum(T, 0.0);
  const RandomStream walk(config.seed, "walk");

  for (std::size_t r = 0; r < config.replicates; ++r) {
    const RandomStream replicate = walk.derive(r);
    ParamVector sum = ParamVector::zeros(config.d);
    ParamVector u = ParamVector::zeros(config.d);
    for (std::size_t t = T; t-- > 0;) {
      RandomStream step = replicate.derive(t);
      for (std::size_t i = 0; i < config.d; ++i) u[i] = step.gauss();
      const double len = norm2(u);
      for (std::size_t i = 0; i < config.d; ++i) u[i] /= len;
      axpy_inplace(1.0, u, sum);

      const ParamVector g = scale(-config.s, u);
      const ParamVector diff = scale(-config.s, sum);
      const auto ratio = rsi_of(g, diff);
      const auto cos = gamma_of(g, diff);
      if (!ratio || !cos) throw Error("random walk: degenerate step");
      ratio_sum[t] += *ratio;
      cos_sum[t] += *cos;
    }
  }

  std::vector<WalkPoint> points(T);
  const double reps = static_cast<double>(config.replicates);
  for (std::size_t t = 0; t < T; ++t) {
    points[t] = {t, T - t, ratio_sum[t] / reps, cos_sum[t] / reps};
  }
  return points;
}

// ---------------------------------------------------------------------------

ConvergenceReport convergence_check(const ConvergenceSpec& spec) {
  if (!(spec.mu > 0.0) || !(spec.L > 0.0)) throw Error("convergence: mu and L must be positive");
  if (spec.mu > spec.L) throw Error("convergence: mu must not exceed L");
  if (spec.d == 0) throw Error("convergence: d must be positive");

  RandomStream data(spec.seed, "data");
  const auto spectrum = spanning_spectrum(data, spec.d, spec.mu, spec.L);
  const ParamVector origin = ParamVector::zeros(spec.d);
  const QuadObjective quad(spectrum, origin);

  RandomStream init(spec.seed, "init");
  ParamVector w = ParamVector::zeros(spec.d);
  for (std::size_t i = 0; i < spec.d; ++i) w[i] = init.gauss();

  ConvergenceReport report;
  report.eta = spec.mu / (spec.L * spec.L);
  const double rate = 1.0 - (spec.mu * spec.mu) / (spec.L * spec.L);
  const double d0 = dot(w, w);
  report.points.reserve(spec.T + 1);
  report.points.push_back({0, d0, d0});

  double bound = d0;
  for (std::size_t t = 1; t <= spec.T; ++t) {
    const ParamVector g = quad.evaluate(w, {}).grad;
    w = sgd_step(w, g, report.eta);
    bound *= rate;
    const double observed = dot(w, w);
    report.points.push_back({t, bound, observed});
    double ratio = 0.0;
    if (bound > 0.0) ratio = observed / bound;
    else if (observed > 0.0) ratio = std::numeric_limits<double>::infinity();
    report.max_ratio = std::max(report.max_ratio, ratio);
  }
  return report;
}

// ---------------------------------------------------------------------------

double optimal_step_check(std::uint64_t seed, std::size_t d, std::size_t trials) {
  if (trials == 0) throw Error("optimal step check: need at least one trial");
  if (d == 0) throw Error("optimal step check: d must be positive");
  RandomStream rng(seed, "trials");
  auto draw = [&] {
    ParamVector v = ParamVector::zeros(d);
    for (std::size_t i = 0; i < d; ++i) v[i] = rng.gauss();
    return v;
  };

  double worst = 0.0;
  for (std::size_t k = 0; k < trials;) {
    const ParamVector w = draw();
    const ParamVector g = draw();
    const ParamVector wstar = draw();
    const Measurement m = measure(g, w, wstar);
    if (m.degenerate) continue;
    ++k;
    // eta* is negative whenever RSI is
    const ParamVector next = axpy(-m.lo_lr, g, w);
    const double after = norm2(sub(next, wstar));
    const double predicted = contraction_factor(m.gamma) * m.dist;
    const double denom = predicted > 0.0 ? predicted : m.dist;
    worst = std::max(worst, std::abs(after - predicted) / denom);
  }
  return worst;
}

// ---------------------------------------------------------------------------

double CounterexampleReport::fraction_negative_rsi() const {
  return measured ? static_cast<double>(negative_rsi) / static_cast<double>(measured) : 0.0;
}

double CounterexampleReport::fraction_negative_gamma() const {
  return measured ? static_cast<double>(negative_gamma) / static_cast<double>(measured) : 0.0;
}

CounterexampleReport counterexample_run(const TrainPlan& plan) {
  const auto kind = plan.objective.kind;
  if (kind == ObjectiveKind::mlp) {
    throw Error("counterexample: objective must be alm, sm or quad");
  }
  const auto objective = make_objective(plan.objective, plan.master_seed);
  if (kind == ObjectiveKind::alm && objective->sample_count() <= plan.batch_size) {
    throw Error("counterexample: alm needs stochastic minibatches (batch < n)");
  }
  const PassOneResult one = pass_one(plan, *objective);
  PassTwoResult two = pass_two(plan, *objective, one.wstar, &one.chain);

  CounterexampleReport report;
  report.records = std::move(two.records);
  for (const auto& r : report.records) {
    if (r.degenerate) continue;
    ++report.measured;
    if (r.rsi < 0.0) ++report.negative_rsi;
    if (r.gamma < 0.0) ++report.negative_gamma;
  }
  return report;
}

// ---------------------------------------------------------------------------

void write_walk_csv(const std::filesystem::path& path,
                    std::span<const WalkPoint> points) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "metric,t,remaining,predicted,observed\n";
  for (const auto& p : points) {
    const double rem = static_cast<double>(p.remaining);
    out << "ratio," << p.t << ',' << p.remaining << ',' << format_double(1.0 / rem)
        << ',' << format_double(p.ratio) << '\n';
  }
  for (const auto& p : points) {
    const double rem = static_cast<double>(p.remaining);
    out << "cosine," << p.t << ',' << p.remaining << ','
        << format_double(1.0 / std::sqrt(rem)) << ',' << format_double(p.cosine) << '\n';
  }
}

void write_convergence_csv(const std::filesystem::path& path,
                           const ConvergenceReport& report) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "t,predicted,observed\n";
  for (const auto& p : report.points) {
    out << p.t << ',' << format_double(p.predicted) << ',' << format_double(p.observed)
        << '\n';
  }
}

}  // namespace trajgeom
