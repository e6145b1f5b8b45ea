// Acceptance suite: one PASS/FAIL line per criterion.
//
//   trajgeom_acceptance            all criteria
//   trajgeom_acceptance 4 7 14     a subset

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cli/commands.hpp"
#include "cli/config.hpp"
#include "cli/svg_report.hpp"
#include "oracles.hpp"
#include "trajgeom/baselines.hpp"
#include "trajgeom/geometry.hpp"
#include "trajgeom/protocol.hpp"
#include "trajgeom/random.hpp"
#include "trajgeom/records_io.hpp"

using namespace trajgeom;
namespace fs = std::filesystem;

namespace {

// Tolerances and budgets.
constexpr double kIdentityRel = 1e-12;           // 1
constexpr double kIdentityBudget = 1.0;          // s
constexpr double kRatioRel = 1e-12;              // 2
constexpr double kContractionRel = 1e-10;        // 3
constexpr double kBoundSlack = 1e-9;             // 4
constexpr double kConvergeBudget = 1.0;          // s
constexpr double kTerminalGamma = 1e-9;          // 6
constexpr double kWalkCosineBand = 0.20;         // 7
constexpr double kWalkRatioBand = 0.25;
constexpr std::size_t kWalkMinRemaining = 10;
constexpr double kWalkBudget = 30.0;             // s
constexpr double kGradRel = 1e-5;                // 8
constexpr double kGradEps = 1e-6;
constexpr double kAdditivityRel = 1e-12;         // 9
constexpr double kSubadditivityAbs = 1e-12;
constexpr double kCounterBudget = 30.0;          // 10, s per run
constexpr double kPositiveFraction = 0.99;       // 11
constexpr double kStabilityRatio = 3.0;
constexpr double kReferenceLoss = 0.1;
constexpr double kReferenceBudget = 300.0;       // s
constexpr double kInversionSlack = 0.10;         // 12
constexpr double kSweepBudget = 1200.0;          // s
constexpr double kDefBoundSlack = 1e-9;          // 13

const fs::path kConfigs = TRAJGEOM_CONFIG_DIR;

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

ParamVector randv(RandomStream& s, std::size_t d) {
  std::vector<double> v(d);
  for (auto& x : v) x = s.gauss();
  return ParamVector(std::move(v));
}

TrainPlan load_config_plan(const std::string& name) {
  return cli::plan_from_config(cli::ConfigFile::load((kConfigs / name).string()));
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Shared state across criteria.
struct Context {
  fs::path work;
  // Every record produced by a run in this suite, keyed by run id.
  std::map<std::string, std::vector<StepRecord>> records;
  std::map<std::string, double> final_loss;
  std::map<std::string, double> run_seconds;

  void keep(const std::string& id, std::vector<StepRecord> rs) { records[id] = std::move(rs); }
};

// Pass one, checkpoint round trip through disk, pass two against the chain.
Outcome replay(Context& ctx, const TrainPlan& plan) {
  const auto t0 = Clock::now();
  const auto objective = make_objective(plan.objective, plan.master_seed);
  const auto one = pass_one(plan, *objective);
  const fs::path ckpt = ctx.work / (plan.run_id + ".tgw");
  write_checkpoint(ckpt, one.wstar);
  const ParamVector wstar = read_checkpoint(ckpt);
  if (!wstar.bitwise_equal(one.wstar)) return {false, plan.run_id + ": checkpoint round trip"};
  try {
    const auto two = pass_two(plan, *objective, wstar, &one.chain);
    if (two.chain.links() != one.chain.links()) return {false, plan.run_id + ": chains differ"};
    ctx.keep(plan.run_id, two.records);
  } catch (const ReplayMismatchError& e) {
    return {false, plan.run_id + ": " + e.what()};
  }
  ctx.final_loss[plan.run_id] = one.final_loss;
  ctx.run_seconds[plan.run_id] = seconds_since(t0);
  return {true, plan.run_id};
}

// ---------------------------------------------------------------------------

Outcome c01_distance_identity(Context&) {
  const auto t0 = Clock::now();
  RandomStream s(101, "trials");
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const std::size_t d = 1 + s.below(50);
    const auto w = randv(s, d), g = randv(s, d), ws = randv(s, d);
    const double eta = 2.0 * s.uniform();
    const auto id = step_distance_identity(w, g, eta, ws);
    worst = std::max(worst, std::abs(id.lhs - id.rhs) / id.rhs);
  }
  const double secs = seconds_since(t0);
  return {worst <= kIdentityRel && secs < kIdentityBudget,
          "1000 instances, worst rel. " + num(worst) + ", " + num(secs) + " s"};
}

Outcome c02_ratio_identity(Context& ctx) {
  if (ctx.records.empty()) {
    for (const char* cfg : {"quadratic_gd.ini", "alm.ini", "sm.ini"}) {
      replay(ctx, load_config_plan(cfg));
    }
  }
  std::size_t checked = 0;
  double worst = 0.0;
  for (const auto& [id, rs] : ctx.records) {
    for (const auto& r : rs) {
      if (r.degenerate) continue;
      ++checked;
      if (r.rsi == 0.0) {
        worst = std::max(worst, std::abs(r.gamma * r.eb));
        continue;
      }
      worst = std::max(worst, std::abs(r.gamma * r.eb - r.rsi) / std::abs(r.rsi));
    }
  }
  return {checked > 0 && worst <= kRatioRel,
          std::to_string(checked) + " records from " + std::to_string(ctx.records.size()) +
              " runs, worst rel. " + num(worst)};
}

Outcome c03_optimal_step(Context&) {
  const double lib = optimal_step_check(303, 20, 10000);
  // Second opinion from the raw definitions.
  RandomStream s(304, "trials");
  double worst = 0.0;
  for (int k = 0; k < 10000; ++k) {
    const auto w = randv(s, 20), g = randv(s, 20), ws = randv(s, 20);
    const auto r = rsi(g, w, ws), e = eb(g, w, ws), c = gamma(g, w, ws);
    const double eta = *r / (*e * *e);
    const double before = norm2(sub(w, ws));
    const double after = norm2(sub(axpy(-eta, g, w), ws));
    const double predicted = std::sqrt(1.0 - *c * *c) * before;
    worst = std::max(worst, std::abs(after - predicted) / predicted);
  }
  return {lib <= kContractionRel && worst <= kContractionRel,
          "10^4 trials, worst rel. " + num(std::max(lib, worst))};
}

Outcome c04_linear_convergence(Context&) {
  const auto t0 = Clock::now();
  const auto rep = convergence_check({1.0, 10.0, 50, 200, 404});
  const double secs = seconds_since(t0);
  bool ok = rep.points.size() == 201 && std::abs(rep.eta - 1.0 / 100.0) < 1e-15;
  const double d0 = rep.points.front().observed;
  for (const auto& p : rep.points) {
    const double bound = std::pow(1.0 - 1.0 / 100.0, static_cast<double>(p.t)) * d0;
    ok = ok && p.observed <= bound * (1.0 + kBoundSlack);
  }
  return {ok && rep.max_ratio <= 1.0 + kBoundSlack && secs < kConvergeBudget,
          "max observed/bound " + num(rep.max_ratio) + ", " + num(secs) + " s"};
}

Outcome c05_replay(Context& ctx) {
  std::vector<std::string> ok_ids;
  for (const char* cfg : {"quadratic_gd.ini", "blobs_mlp_sgd.ini", "blobs_mlp_momentum.ini",
                          "blobs_mlp_adam.ini", "alm.ini", "sm.ini"}) {
    const auto out = replay(ctx, load_config_plan(cfg));
    if (!out.pass) return {false, "mismatch: " + out.detail};
    ok_ids.push_back(out.detail);
  }
  std::string ids;
  for (const auto& id : ok_ids) ids += (ids.empty() ? "" : ", ") + id;
  return {true, "bit-exact: " + ids};
}

Outcome c06_terminal_gamma(Context& ctx) {
  const TrainPlan plan = load_config_plan("quadratic_gd.ini");
  if (!ctx.records.count(plan.run_id)) replay(ctx, plan);
  const auto& last = ctx.records.at(plan.run_id).back();
  const bool ok = !last.degenerate && last.gamma >= 1.0 - kTerminalGamma && last.gamma <= 1.0;
  return {ok, "gamma at t=" + std::to_string(last.t) + " is 1 - " + num(1.0 - last.gamma)};
}

Outcome c07_random_walk(Context&) {
  const auto cfg = cli::walk_from_config(cli::ConfigFile::load((kConfigs / "walk.ini").string()));
  WalkConfig wc = cfg.walk;
  wc.d = 50000;
  wc.T = 200;
  wc.replicates = 20;
  const auto t0 = Clock::now();
  const auto pts = random_walk(wc);
  const double secs = seconds_since(t0);
  double worst_cos = 0.0, worst_ratio = 0.0;
  bool terminal = false;
  for (const auto& p : pts) {
    const double rem = static_cast<double>(wc.T - p.t);
    if (p.t == wc.T - 1) terminal = p.cosine == 1.0;
    if (rem < kWalkMinRemaining) continue;
    worst_cos = std::max(worst_cos, std::abs(p.cosine - 1.0 / std::sqrt(rem)) * std::sqrt(rem));
    worst_ratio = std::max(worst_ratio, std::abs(p.ratio - 1.0 / rem) * rem);
  }
  return {worst_cos <= kWalkCosineBand && worst_ratio <= kWalkRatioBand && terminal &&
              secs < kWalkBudget,
          "cosine dev " + num(worst_cos) + ", ratio dev " + num(worst_ratio) +
              ", cos(T-1)==1: " + (terminal ? "yes" : "no") + ", " + num(secs) + " s"};
}

Outcome c08_gradients(Context&) {
  cli::GradCheckConfig gc;
  gc.eps = kGradEps;
  gc.tolerance = kGradRel;
  gc.seed = 808;
  bool ok = true;
  std::string detail;
  for (const auto& row : cli::run_gradcheck(gc)) {
    ok = ok && row.max_rel_error < kGradRel && row.dim <= 100;
    detail += row.objective + " " + num(row.max_rel_error) + "; ";
  }
  if (gc.objectives.size() != 5) ok = false;

  // Second opinion: test-side central differences on the configured objectives.
  auto probe = [&](const std::string& tag, const Objective& obj, std::uint64_t seed) {
    RandomStream init(seed, "init");
    const auto w = obj.initial_point(init);
    std::vector<std::size_t> batch(std::min<std::size_t>(obj.sample_count(), 32));
    for (std::size_t i = 0; i < batch.size(); ++i) batch[i] = i;
    auto f = [&](const std::vector<double>& x) { return obj.evaluate(ParamVector(x), batch).loss; };
    const auto analytic = obj.evaluate(w, batch).grad;
    const std::vector<double> wv(w.values().begin(), w.values().end());
    const std::vector<double> av(analytic.values().begin(), analytic.values().end());
    const double err = oracle::max_rel_error(av, oracle::numeric_grad(f, wv, kGradEps));
    ok = ok && err < kGradRel && obj.dim() <= 100;
    detail += tag + "(oracle) " + num(err) + "; ";
  };
  for (const char* cfg : {"quadratic_gd.ini", "alm.ini", "sm.ini"}) {
    const TrainPlan plan = load_config_plan(cfg);
    probe(plan.run_id, *make_objective(plan.objective, plan.master_seed), plan.master_seed);
  }
  RandomStream data(808, "data");
  MlpObjective mlp(std::make_shared<const Dataset>(gen_blobs(data, 30, 5, 3, 1.0)), {8});
  probe("mlp", mlp, 808);
  return {ok, detail};
}

Outcome c09_additivity(Context&) {
  RandomStream s(909, "trials");
  double worst_rel = 0.0, worst_excess = -INFINITY;
  for (int k = 0; k < 2000; ++k) {
    const std::size_t d = 1 + s.below(100);
    const auto g1 = randv(s, d), g2 = randv(s, d), w = randv(s, d), ws = randv(s, d);
    const auto g12 = add(g1, g2);
    const double r1 = *rsi(g1, w, ws), r2 = *rsi(g2, w, ws), r12 = *rsi(g12, w, ws);
    // relative to the magnitude of the parts, so a cancelling sum is not penalized
    worst_rel = std::max(worst_rel, std::abs(r12 - (r1 + r2)) / (std::abs(r1) + std::abs(r2)));
    worst_excess = std::max(worst_excess, *eb(g12, w, ws) - (*eb(g1, w, ws) + *eb(g2, w, ws)));
  }
  // Minibatch form: the summed loss over B1 u B2 has gradient g(B1) + g(B2).
  RandomStream data(910, "data");
  auto set = std::make_shared<const Dataset>(gen_blobs(data, 40, 6, 4, 1.0));
  MlpObjective mlp(set, {10});
  RandomStream init(910, "init");
  const auto w = mlp.initial_point(init);
  const auto ws = mlp.initial_point(init);
  std::vector<std::size_t> b1, b2;
  for (std::size_t i = 0; i < 40; ++i) (i % 3 == 0 ? b1 : b2).push_back(i);
  std::vector<std::size_t> merged(b1);
  merged.insert(merged.end(), b2.begin(), b2.end());
  const auto G1 = scale(static_cast<double>(b1.size()), mlp.evaluate(w, b1).grad);
  const auto G2 = scale(static_cast<double>(b2.size()), mlp.evaluate(w, b2).grad);
  const auto G = scale(static_cast<double>(merged.size()), mlp.evaluate(w, merged).grad);
  const double r1 = *rsi(G1, w, ws), r2 = *rsi(G2, w, ws), r = *rsi(G, w, ws);
  const double batch_rel = std::abs(r - (r1 + r2)) / (std::abs(r1) + std::abs(r2));
  const double batch_excess = *eb(G, w, ws) - (*eb(G1, w, ws) + *eb(G2, w, ws));
  const bool ok = worst_rel <= kAdditivityRel && worst_excess <= kSubadditivityAbs &&
                  batch_rel <= kAdditivityRel && batch_excess <= kSubadditivityAbs;
  return {ok, "rsi rel. " + num(std::max(worst_rel, batch_rel)) + ", eb excess " +
                  num(std::max(worst_excess, batch_excess))};
}

Outcome c10_counterexamples(Context& ctx) {
  std::string detail;
  bool ok = true;
  auto run = [&](const char* cfg) {
    const TrainPlan plan = load_config_plan(cfg);
    const auto t0 = Clock::now();
    const auto rep = counterexample_run(plan);
    const double secs = seconds_since(t0);
    ok = ok && secs < kCounterBudget;
    ctx.keep(plan.run_id + "_counterexample", rep.records);
    return std::make_pair(rep, secs);
  };
  const auto [sm, sm_s] = run("sm.ini");
  const auto [alm, alm_s] = run("alm.ini");
  const auto [ctl, ctl_s] = run("quadratic_control.ini");
  ok = ok && sm.fraction_negative_rsi() > 0.0 && alm.negative_gamma >= 1 && ctl.negative_rsi == 0;
  detail = "SM neg. RSI " + num(sm.fraction_negative_rsi()) + " (" + num(sm_s) + " s), ALM neg. gamma " +
           std::to_string(alm.negative_gamma) + " (" + num(alm_s) + " s), control neg. RSI " +
           std::to_string(ctl.negative_rsi);
  return {ok, detail};
}

Outcome c11_positive_gamma(Context& ctx) {
  const TrainPlan plan = load_config_plan("blobs_mlp_sgd.ini");
  if (!ctx.records.count(plan.run_id)) {
    const auto out = replay(ctx, plan);
    if (!out.pass) return out;
  }
  const auto& rs = ctx.records.at(plan.run_id);
  const std::size_t last = plan.epochs - 1;  // final epoch, excluded
  std::size_t steps = 0, positive = 0;
  std::map<std::size_t, std::pair<double, std::size_t>> per_epoch;
  for (const auto& r : rs) {
    if (r.epoch < 1 || r.epoch >= last) continue;
    ++steps;
    if (!r.degenerate && r.gamma > 0.0) ++positive;
    if (!r.degenerate) {
      per_epoch[r.epoch].first += r.gamma;
      per_epoch[r.epoch].second += 1;
    }
  }
  double lo = INFINITY, hi = -INFINITY;
  for (const auto& [e, acc] : per_epoch) {
    const double m = acc.first / static_cast<double>(acc.second);
    lo = std::min(lo, m);
    hi = std::max(hi, m);
  }
  const double frac = static_cast<double>(positive) / static_cast<double>(steps);
  const double loss = ctx.final_loss.at(plan.run_id);
  const double secs = ctx.run_seconds.at(plan.run_id);
  const bool ok = frac >= kPositiveFraction && lo > 0.0 && hi / lo < kStabilityRatio &&
                  loss < kReferenceLoss && secs < kReferenceBudget && per_epoch.size() == last - 1;
  return {ok, "d=" + std::to_string(make_objective(plan.objective, plan.master_seed)->dim()) +
                  ", gamma>0 on " + num(100.0 * frac) + "% of 0-based epochs 1-28, epoch-mean range [" +
                  num(lo) + ", " + num(hi) + "] ratio " + num(hi / lo) + ", final loss " +
                  num(loss) + ", " + num(secs) + " s"};
}

Outcome c12_batch_trend(Context& ctx) {
  const auto t0 = Clock::now();
  cli::CommandOptions o;
  o.config = (kConfigs / "sweep_batch.ini").string();
  o.out = ctx.work / "sweep_batch";
  std::ostringstream out, err;
  const int rc = cli::cmd_sweep(o, out, err);
  const double secs = seconds_since(t0);
  if (rc != cli::kExitOk) return {false, "sweep exit " + std::to_string(rc) + ": " + err.str()};
  const auto cfg = cli::ConfigFile::load(o.config);
  const auto sweep = cli::sweep_from_config(cfg);
  const TrainPlan base = cli::plan_from_config(cfg);
  std::vector<double> means;
  std::string detail;
  for (const auto& v : sweep.values) {
    const auto rs = read_steps_csv(*o.out / ("batch_size_" + v) / kStepsFile);
    const auto m = mean_metric(rs, Metric::gamma, 1, base.epochs - 1);
    if (!m) return {false, "no gamma for batch " + v};
    means.push_back(*m);
    ctx.keep("sweep_batch_" + v, rs);
    detail += v + ":" + num(*m) + " ";
  }
  int inversions = 0;
  bool within = true;
  for (std::size_t i = 1; i < means.size(); ++i) {
    if (means[i] < means[i - 1]) {
      ++inversions;
      within = within && means[i] >= (1.0 - kInversionSlack) * means[i - 1];
    }
  }
  const bool ok = inversions <= 1 && within && secs < kSweepBudget;
  return {ok, "mean gamma " + detail + "(" + std::to_string(inversions) + " inversions), " +
                  num(secs) + " s"};
}

Outcome c13_quadratic_bounds(Context& ctx) {
  const TrainPlan plan = load_config_plan("quadratic_gd.ini");
  if (!ctx.records.count(plan.run_id)) replay(ctx, plan);
  const double mu = plan.objective.mu, L = plan.objective.L;
  double min_rsi = INFINITY, max_eb = 0.0;
  std::size_t n = 0;
  for (const auto& r : ctx.records.at(plan.run_id)) {
    if (r.degenerate) continue;
    ++n;
    min_rsi = std::min(min_rsi, r.rsi);
    max_eb = std::max(max_eb, r.eb);
  }
  return {n > 0 && min_rsi >= mu - kDefBoundSlack && max_eb <= L + kDefBoundSlack,
          std::to_string(n) + " records, min rsi " + num(min_rsi) + " (mu " + num(mu) +
              "), max eb " + num(max_eb) + " (L " + num(L) + ")"};
}

// Recovers (epoch, max, min) from a band polygon using the plot-area mapping.
struct BandPoint {
  double epoch, hi, lo;
};

std::map<std::string, std::vector<BandPoint>> parse_bands(const std::string& svg) {
  auto attr = [&](const std::string& name) {
    const std::regex re(name + "=\"([^\"]*)\"");
    const auto at = svg.find("class=\"plot-area\"");
    std::smatch m;
    const std::string tail = svg.substr(at, svg.find("/>", at) - at);
    std::regex_search(tail, m, re);
    return m[1].str();
  };
  const double x = std::stod(attr("x")), y = std::stod(attr("y"));
  const double w = std::stod(attr("width")), h = std::stod(attr("height"));
  const double xlo = std::stod(attr("data-x-lo")), xhi = std::stod(attr("data-x-hi"));
  const double ylo = std::stod(attr("data-y-lo")), yhi = std::stod(attr("data-y-hi"));
  const bool log = attr("data-log") == "1";
  auto value = [&](double py) {
    const double v = ylo + (y + h - py) / h * (yhi - ylo);
    return log ? std::pow(10.0, v) : v;
  };
  std::map<std::string, std::vector<BandPoint>> out;
  const std::regex poly("<polygon class=\"band\" data-run=\"([^\"]*)\" points=\"([^\"]*)\"");
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), poly); it != std::sregex_iterator(); ++it) {
    std::vector<std::pair<double, double>> pts;
    std::istringstream ps((*it)[2].str());
    std::string pair;
    while (ps >> pair) {
      const auto comma = pair.find(',');
      pts.emplace_back(std::stod(pair.substr(0, comma)), std::stod(pair.substr(comma + 1)));
    }
    const std::size_t k = pts.size() / 2;
    std::vector<BandPoint> band;
    for (std::size_t i = 0; i < k; ++i) {
      const auto& upper = pts[i];
      const auto& lower = pts[pts.size() - 1 - i];
      band.push_back({xlo + (upper.first - x) / w * (xhi - xlo), value(upper.second),
                      value(lower.second)});
      if (upper.first != lower.first) band.back().epoch = NAN;
    }
    out[(*it)[1].str()] = band;
  }
  return out;
}

Outcome c14_report(Context& ctx) {
  // inputs: the batch sweep runs if present, otherwise a fresh quadratic run
  std::vector<fs::path> dirs;
  for (const char* b : {"64", "128", "256", "512"}) {
    const auto d = ctx.work / "sweep_batch" / (std::string("batch_size_") + b);
    if (fs::exists(d / kEpochsFile)) dirs.push_back(d);
  }
  if (dirs.empty()) {
    cli::CommandOptions o;
    o.config = (kConfigs / "quadratic_gd.ini").string();
    o.out = ctx.work / "report_quadratic";
    std::ostringstream out, err;
    if (cli::cmd_measure(o, out, err) != cli::kExitOk) return {false, err.str()};
    dirs.push_back(*o.out);
  }
  std::map<fs::path, std::string> before;
  for (const auto& d : dirs) before[d] = slurp(d / kEpochsFile);

  bool ok = true;
  double worst = 0.0;
  std::size_t bands = 0, points = 0;
  for (bool log : {false, true}) {
    cli::ReportOptions r;
    r.run_dirs = dirs;
    r.metrics = {"gamma", "eb", "dist"};
    r.log_scale = log;
    std::ostringstream out, err;
    r.out = ctx.work / (log ? "report_log_a" : "report_a");
    if (cli::cmd_report(r, out, err) != cli::kExitOk) return {false, err.str()};
    r.out = ctx.work / (log ? "report_log_b" : "report_b");
    if (cli::cmd_report(r, out, err) != cli::kExitOk) return {false, err.str()};
    for (const auto& m : r.metrics) {
      if (log && m == "gamma") continue;  // gamma can be negative
      const std::string file = m + (log ? "_log" : "") + ".svg";
      const auto a = slurp(ctx.work / (log ? "report_log_a" : "report_a") / file);
      const auto b = slurp(ctx.work / (log ? "report_log_b" : "report_b") / file);
      ok = ok && !a.empty() && a == b;
      const auto parsed = parse_bands(a);
      for (const auto& d : dirs) {
        const auto series = cli::load_run_series(d);
        const auto it = parsed.find(series.run_id);
        if (it == parsed.end()) {
          ok = false;
          continue;
        }
        ++bands;
        const Metric metric = parse_metric(m);
        std::vector<const EpochAggregate*> rows;
        for (const auto& agg : series.epochs) {
          if (agg[metric]) rows.push_back(&agg);
        }
        ok = ok && rows.size() == it->second.size();
        double lo = INFINITY, hi = -INFINITY;
        for (const auto* agg : rows) {
          lo = std::min(lo, log ? std::log10((*agg)[metric]->min) : (*agg)[metric]->min);
          hi = std::max(hi, log ? std::log10((*agg)[metric]->max) : (*agg)[metric]->max);
        }
        const double span = std::max(hi - lo, 1e-300);
        for (std::size_t i = 0; i < std::min(rows.size(), it->second.size()); ++i) {
          const auto& st = *(*rows[i])[metric];
          const auto& bp = it->second[i];
          ++points;
          ok = ok && std::abs(bp.epoch - static_cast<double>(rows[i]->epoch)) < 1e-6;
          auto dev = [&](double got, double want) {
            return log ? std::abs(std::log10(got) - std::log10(want)) / span
                       : std::abs(got - want) / span;
          };
          worst = std::max({worst, dev(bp.hi, st.max), dev(bp.lo, st.min)});
        }
      }
    }
  }
  // 6-decimal pixel coordinates on a ~350 px axis spanning at most ~2x the data
  const double tol = 1e-7;
  for (const auto& d : dirs) ok = ok && slurp(d / kEpochsFile) == before[d];
  return {ok && worst <= tol && bands > 0,
          std::to_string(bands) + " bands, " + std::to_string(points) +
              " epochs parsed back, worst deviation " + num(worst) + " of data span, byte-identical"};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  Context ctx;
  ctx.work = fs::temp_directory_path() / "trajgeom_acceptance";
  fs::remove_all(ctx.work);
  fs::create_directories(ctx.work);

  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome(Context&)> run;
  };
  // Criterion 2 checks records collected by the others, so it runs last.
  const std::vector<Criterion> all = {
      {1, "distance identity", c01_distance_identity},
      {3, "optimal-step contraction", c03_optimal_step},
      {4, "linear convergence bound", c04_linear_convergence},
      {5, "replay bit-exactness", c05_replay},
      {6, "vanilla-GD terminal cosine", c06_terminal_gamma},
      {7, "random-walk asymptotics", c07_random_walk},
      {8, "gradient checks", c08_gradients},
      {9, "batch additivity/subadditivity", c09_additivity},
      {10, "counter-example existence", c10_counterexamples},
      {11, "positive gamma on blobs+MLP", c11_positive_gamma},
      {12, "batch-size trend", c12_batch_trend},
      {13, "quadratic RSI/EB bounds", c13_quadratic_bounds},
      {14, "report determinism", c14_report},
      {2, "ratio identity", c02_ratio_identity},
  };

  int failed = 0, ran = 0;
  for (const auto& c : all) {
    if (!only.empty() && !only.count(c.id)) continue;
    ++ran;
    Outcome o;
    try {
      o = c.run(ctx);
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("[%s] C%02d %s: %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%d criteria passed\n", ran - failed, ran);
  return failed == 0 ? 0 : 1;
}
