#include "cli/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <functional>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>

#include "cli/svg_report.hpp"
#include "json.hpp"
#include "trajgeom/baselines.hpp"
#include "trajgeom/dataset.hpp"
#include "trajgeom/errors.hpp"
#include "trajgeom/objectives.hpp"
#include "trajgeom/protocol.hpp"
#include "trajgeom/random.hpp"
#include "trajgeom/records_io.hpp"

namespace trajgeom::cli {

namespace {

using nlohmann::json;

// Maps exceptions to exit statuses.
int guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DivergenceError& e) {
    err << "divergence: " << e.what() << '\n';
    return kExitDivergence;
  } catch (const ReplayMismatchError& e) {
    err << "replay mismatch: " << e.what() << '\n';
    return kExitReplayMismatch;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

std::filesystem::path out_dir(const CommandOptions& opts, const std::string& fallback) {
  return opts.out ? *opts.out : std::filesystem::path(fallback);
}

bool looks_like_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  char c = 0;
  while (in.get(c)) {
    if (c == ' ' || c == '\n' || c == '\r' || c == '\t') continue;
    return c == '{';
  }
  return false;
}

void print_manifest_summary(std::ostream& out, const RunArtifacts& art,
                            const TrainPlan& plan) {
  out << "run_id: " << plan.run_id << '\n'
      << "manifest: " << art.manifest.string() << '\n'
      << "checkpoint: " << art.checkpoint.string() << '\n'
      << "steps: " << art.steps_csv.string() << '\n'
      << "epochs: " << art.epochs_csv.string() << '\n'
      << "final_loss: " << format_double(art.final_loss) << '\n'
      << (plan.exclude_final_epoch ? "mean_gamma (final epoch excluded): "
                                   : "mean_gamma (all epochs): ")
      << (art.mean_gamma ? format_double(*art.mean_gamma) : std::string("n/a")) << '\n';
}

}  // namespace

LoadedPlan load_plan(const CommandOptions& opts) {
  LoadedPlan lp;
  if (looks_like_json(opts.config)) {
    std::ifstream in(opts.config, std::ios::binary);
    json manifest;
    try {
      manifest = json::parse(in);
    } catch (const json::exception& e) {
      throw ConfigError(opts.config + ": not a valid manifest: " + e.what(), 0);
    }
    if (!manifest.contains("plan")) throw ConfigError(opts.config + ": manifest has no plan", 0);
    try {
      lp.plan = TrainPlan::from_json(manifest["plan"].dump());
    } catch (const Error& e) {
      throw ConfigError(opts.config + ": " + e.what(), 0);
    }
    if (manifest.contains("config") && manifest["config"].is_object()) {
      lp.echo = manifest["config"].get<std::map<std::string, std::string>>();
    }
  } else {
    const ConfigFile cfg = ConfigFile::load(opts.config);
    lp.plan = plan_from_config(cfg);
    lp.echo = cfg.flatten();
  }
  if (opts.out) lp.plan.output_dir = *opts.out;
  if (opts.exclude_final_epoch) lp.plan.exclude_final_epoch = *opts.exclude_final_epoch;
  return lp;
}

int cmd_measure(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const LoadedPlan lp = load_plan(opts);
    const RunArtifacts art = run_protocol(lp.plan, lp.echo);
    print_manifest_summary(out, art, lp.plan);
    return kExitOk;
  });
}

// ---------------------------------------------------------------------------

int cmd_sweep(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ConfigFile cfg = ConfigFile::load(opts.config);
    TrainPlan base = plan_from_config(cfg);
    const SweepSpec sweep = sweep_from_config(cfg);
    if (opts.out) base.output_dir = *opts.out;
    if (opts.exclude_final_epoch) base.exclude_final_epoch = *opts.exclude_final_epoch;
    const auto echo = cfg.flatten();

    std::vector<TrainPlan> plans;
    for (std::size_t i = 0; i < sweep.values.size(); ++i) {
      TrainPlan p = sweep_point(base, sweep, i);
      try {
        p.validate();
      } catch (const Error& e) {
        cfg.error_at("sweep", "values", "point '" + sweep.values[i] + "': " + e.what());
      }
      plans.push_back(std::move(p));
    }

    std::vector<SweepPointResult> results(plans.size());
    std::vector<std::vector<EpochAggregate>> aggregates(plans.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t i = next++; i < plans.size(); i = next++) {
        SweepPointResult& r = results[i];
        r.value = sweep.values[i];
        r.run_id = plans[i].run_id;
        std::ostringstream perr;
        r.status = guarded(perr, [&] {
          const RunArtifacts art = run_protocol(plans[i], echo);
          r.final_loss = art.final_loss;
          r.mean_gamma = art.mean_gamma;
          aggregates[i] = art.epochs;
          return kExitOk;
        });
        r.error = perr.str();
        if (!r.error.empty() && r.error.back() == '\n') r.error.pop_back();
      }
    };
    const std::size_t jobs = std::clamp<std::size_t>(opts.jobs, 1, plans.size());
    std::vector<std::thread> pool;
    for (std::size_t j = 1; j < jobs; ++j) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    std::filesystem::create_directories(base.output_dir);
    const auto combined = base.output_dir / "sweep.csv";
    {
      std::ofstream csv(combined, std::ios::binary | std::ios::trunc);
      if (!csv) throw Error("cannot write " + combined.string());
      csv << "swept_value,epoch,metric,mean,min,max\n";
      for (std::size_t i = 0; i < plans.size(); ++i) {
        for (const auto& agg : aggregates[i]) {
          for (Metric m : kAllMetrics) {
            const auto& st = agg[m];
            if (!st) continue;
            csv << sweep.values[i] << ',' << agg.epoch << ',' << to_string(m) << ','
                << format_double(st->mean) << ',' << format_double(st->min) << ','
                << format_double(st->max) << '\n';
          }
        }
      }
    }
    const auto summary = base.output_dir / "sweep_summary.csv";
    {
      std::ofstream csv(summary, std::ios::binary | std::ios::trunc);
      if (!csv) throw Error("cannot write " + summary.string());
      csv << "swept_value,run_id,status,final_loss,mean_gamma,error\n";
      for (const auto& r : results) {
        std::string msg = r.error;
        std::replace(msg.begin(), msg.end(), '"', '\'');
        csv << r.value << ',' << r.run_id << ',' << r.status << ','
            << (r.status == kExitOk ? format_double(r.final_loss) : "") << ','
            << (r.mean_gamma ? format_double(*r.mean_gamma) : "") << ",\"" << msg << "\"\n";
      }
    }

    int status = kExitOk;
    out << "sweep over " << to_string(sweep.axis) << ": " << results.size() << " points\n";
    for (const auto& r : results) {
      out << "  " << to_string(sweep.axis) << '=' << r.value << "  ";
      if (r.status == kExitOk) {
        out << "final_loss=" << format_double(r.final_loss) << "  mean_gamma="
            << (r.mean_gamma ? format_double(*r.mean_gamma) : std::string("n/a")) << '\n';
      } else {
        out << "FAILED (exit " << r.status << "): " << r.error << '\n';
        if (status == kExitOk) status = r.status;
      }
    }
    out << "combined: " << combined.string() << '\n' << "summary: " << summary.string() << '\n';
    return status;
  });
}

// ---------------------------------------------------------------------------

int cmd_walk(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ConfigFile cfg = ConfigFile::load(opts.config);
    const WalkCheck check = walk_from_config(cfg);
    if (check.walk.dimension_warning()) {
      err << "warning: d = " << check.walk.d << " is not much larger than T = "
          << check.walk.T << "; the asymptotic predictions assume d >> T\n";
    }
    const auto points = random_walk(check.walk);
    const auto dir = out_dir(opts, "runs/walk");
    std::filesystem::create_directories(dir);
    write_walk_csv(dir / kWalkFile, points);

    double worst_cos = 0.0;
    double worst_ratio = 0.0;
    bool terminal_exact = false;
    for (const auto& p : points) {
      if (p.remaining == 1) terminal_exact = p.cosine == 1.0;
      if (p.remaining < check.min_remaining) continue;
      const double rem = static_cast<double>(p.remaining);
      worst_cos = std::max(worst_cos, std::abs(p.cosine * std::sqrt(rem) - 1.0));
      worst_ratio = std::max(worst_ratio, std::abs(p.ratio * rem - 1.0));
    }
    const bool ok_cos = worst_cos <= check.cosine_tolerance;
    const bool ok_ratio = worst_ratio <= check.ratio_tolerance;
    out << "walk.csv: " << (dir / kWalkFile).string() << '\n';
    out << (ok_cos ? "PASS" : "FAIL") << " cosine vs (T-t)^-1/2 for T-t >= "
        << check.min_remaining << ": worst relative deviation " << format_double(worst_cos)
        << " (tolerance " << format_double(check.cosine_tolerance) << ")\n";
    out << (ok_ratio ? "PASS" : "FAIL") << " ratio vs 1/(T-t) for T-t >= "
        << check.min_remaining << ": worst relative deviation " << format_double(worst_ratio)
        << " (tolerance " << format_double(check.ratio_tolerance) << ")\n";
    out << (terminal_exact ? "PASS" : "FAIL") << " cosine at t = T-1 is exactly 1\n";
    return ok_cos && ok_ratio && terminal_exact ? kExitOk : kExitTolerance;
  });
}

int cmd_converge(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ConfigFile cfg = ConfigFile::load(opts.config);
    const ConvergeCheck check = converge_from_config(cfg);
    const auto report = convergence_check(check.spec);
    const auto dir = out_dir(opts, "runs/converge");
    std::filesystem::create_directories(dir);
    write_convergence_csv(dir / kConvergenceFile, report);
    const bool ok = report.max_ratio <= 1.0 + check.tolerance;
    out << "convergence.csv: " << (dir / kConvergenceFile).string() << '\n'
        << "eta = " << format_double(report.eta) << ", max observed/predicted = "
        << format_double(report.max_ratio) << '\n';
    if (ok) {
      out << "PASS bound ratio ≤ 1 (tolerance " << format_double(check.tolerance) << ")\n";
    } else {
      out << "FAIL bound ratio exceeds 1 + " << format_double(check.tolerance) << '\n';
    }
    return ok ? kExitOk : kExitTolerance;
  });
}

int cmd_counterexample(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ConfigFile cfg = ConfigFile::load(opts.config);
    TrainPlan plan = plan_from_config(cfg);
    const CounterexampleExpectation expect = expectation_from_config(cfg);
    if (opts.exclude_final_epoch) plan.exclude_final_epoch = *opts.exclude_final_epoch;
    const auto dir = out_dir(opts, plan.output_dir.string());
    const CounterexampleReport rep = counterexample_run(plan);
    std::filesystem::create_directories(dir);
    write_steps_csv(dir / "steps.csv", rep.records);

    bool ok = false;
    std::string label;
    switch (expect) {
      case CounterexampleExpectation::negative_rsi:
        ok = rep.negative_rsi > 0;
        label = "at least one negative-RSI step";
        break;
      case CounterexampleExpectation::negative_gamma:
        ok = rep.negative_gamma > 0;
        label = "at least one negative-gamma step";
        break;
      case CounterexampleExpectation::no_negative_rsi:
        ok = rep.negative_rsi == 0;
        label = "no negative-RSI step";
        break;
    }
    const auto csv_path = dir / "counterexample.csv";
    {
      std::ofstream csv(csv_path, std::ios::binary | std::ios::trunc);
      if (!csv) throw Error("cannot write " + csv_path.string());
      csv << "run_id,objective,measured,negative_rsi,negative_gamma,"
             "fraction_negative_rsi,fraction_negative_gamma,pass\n"
          << plan.run_id << ',' << to_string(plan.objective.kind) << ',' << rep.measured << ','
          << rep.negative_rsi << ',' << rep.negative_gamma << ','
          << format_double(rep.fraction_negative_rsi()) << ','
          << format_double(rep.fraction_negative_gamma()) << ',' << (ok ? 1 : 0) << '\n';
    }
    out << "counterexample.csv: " << csv_path.string() << '\n'
        << "measured steps: " << rep.measured << ", negative RSI: " << rep.negative_rsi
        << ", negative gamma: " << rep.negative_gamma << '\n'
        << (ok ? "PASS " : "FAIL ") << label << '\n';
    return ok ? kExitOk : kExitTolerance;
  });
}

// ---------------------------------------------------------------------------

std::vector<GradCheckRow> run_gradcheck(const GradCheckConfig& config) {
  RandomStream data(config.seed, "data");
  RandomStream init(config.seed, "init");
  std::vector<GradCheckRow> rows;
  std::size_t index = 0;
  for (const auto& name : config.objectives) {
    RandomStream ds = data.derive(index);
    RandomStream is = init.derive(index);
    ++index;
    std::shared_ptr<const Objective> obj;
    ParamVector w;
    std::vector<std::size_t> batch;
    if (name == "mlp") {
      auto blobs = std::make_shared<const Dataset>(gen_blobs(ds, 15, 4, 3, 1.0));
      obj = std::make_shared<MlpObjective>(blobs, std::vector<std::size_t>{5});
      w = obj->initial_point(is);
      for (std::size_t i = 0; i < 15; ++i) batch.push_back(i);
    } else if (name == "alm" || name == "alm_hinge") {
      auto reg = std::make_shared<const Dataset>(gen_regression(ds, 24, 10));
      obj = std::make_shared<AlmObjective>(
          reg, name == "alm" ? AlmForm::rmse : AlmForm::squared_hinge);
      for (std::size_t i = 0; i < 24; ++i) batch.push_back(i);
      // redraw until every residual is well away from the hinge
      for (;;) {
        w = obj->initial_point(is);
        double closest = INFINITY;
        for (std::size_t i : batch) {
          const auto x = reg->row(i);
          double pred = 0.0;
          for (std::size_t j = 0; j < x.size(); ++j) pred += w[j] * x[j];
          closest = std::min(closest, std::abs(pred - reg->targets[i]));
        }
        if (closest > 1e-3) break;
      }
    } else if (name == "sm") {
      obj = std::make_shared<SmObjective>(SmObjective::random(ds, 20));
      w = obj->initial_point(is);
    } else if (name == "quad") {
      auto spectrum = spanning_spectrum(ds, 50, 1.0, 10.0);
      std::vector<double> c(50);
      for (auto& v : c) v = ds.gauss();
      obj = std::make_shared<QuadObjective>(std::move(spectrum), ParamVector(std::move(c)));
      w = obj->initial_point(is);
    } else {
      throw Error("unknown gradcheck objective '" + name + "'");
    }
    const GradCheckResult res = grad_check(*obj, w, batch, config.eps);
    rows.push_back(GradCheckRow{name, obj->dim(), res.max_rel_error, res.worst_index,
                                res.analytic, res.numeric,
                                res.max_rel_error < config.tolerance});
  }
  return rows;
}

int cmd_gradcheck(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ConfigFile cfg = ConfigFile::load(opts.config);
    const GradCheckConfig gc = gradcheck_from_config(cfg);
    const auto rows = run_gradcheck(gc);
    const auto dir = out_dir(opts, "runs/gradcheck");
    std::filesystem::create_directories(dir);
    const auto csv_path = dir / "gradcheck.csv";
    std::ofstream csv(csv_path, std::ios::binary | std::ios::trunc);
    if (!csv) throw Error("cannot write " + csv_path.string());
    csv << "objective,dim,max_rel_error,worst_index,analytic,numeric,tolerance,pass\n";
    bool ok = true;
    for (const auto& r : rows) {
      csv << r.objective << ',' << r.dim << ',' << format_double(r.max_rel_error) << ','
          << r.worst_index << ',' << format_double(r.analytic) << ','
          << format_double(r.numeric) << ',' << format_double(gc.tolerance) << ','
          << (r.pass ? 1 : 0) << '\n';
      out << (r.pass ? "PASS " : "FAIL ") << r.objective << " (d=" << r.dim
          << "): max rel. error " << format_double(r.max_rel_error) << " (tolerance "
          << format_double(gc.tolerance) << ")\n";
      ok = ok && r.pass;
    }
    out << "gradcheck.csv: " << csv_path.string() << '\n';
    return ok ? kExitOk : kExitTolerance;
  });
}

// ---------------------------------------------------------------------------

int cmd_report(const ReportOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (opts.run_dirs.empty()) throw Error("report needs at least one run directory");
    std::vector<FigureSpec> figures;
    for (const auto& m : opts.metrics) {
      try {
        figures.push_back(make_figure_spec(m, opts.band, opts.log_scale));
      } catch (const Error& e) {
        throw ConfigError(e.what(), 0);
      }
    }
    for (const auto& p : write_report(opts.run_dirs, figures, opts.out)) {
      out << p.string() << '\n';
    }
    return kExitOk;
  });
}

}  // namespace trajgeom::cli
