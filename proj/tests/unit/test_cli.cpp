#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "cli/commands.hpp"
#include "cli/config.hpp"
#include "cli/svg_report.hpp"
#include "trajgeom/records_io.hpp"

using namespace trajgeom;
using namespace trajgeom::cli;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("trajgeom_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

const char* kQuad = R"(# quadratic
[objective]
kind = quad
dim = 8
mu = 1
L = 4

[optimizer]
kind = sgd

[schedule]
lr = 0.25

[protocol]
run_id = q
seed = 2
epochs = 12
steps_per_epoch = 1
)";

fs::path write_file(const fs::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST(Config, ParsesSectionsAndComments) {
  const auto c = ConfigFile::parse("[objective]\nkind = mlp  # trailing\nhidden = 4, 5\n", "x.ini");
  EXPECT_EQ(c.get_string("objective", "kind", ""), "mlp");
  EXPECT_EQ(c.get_size_list("objective", "hidden"), (std::vector<std::size_t>{4, 5}));
  EXPECT_EQ(c.flatten().at("objective.kind"), "mlp");
}

TEST(Config, UnknownKeyNamesKeyAndLine) {
  try {
    ConfigFile::parse("[schedule]\nkind = constant\n\nlearnig_rate = 0.1\n", "cfg.ini");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.line(), 4u);
    const std::string msg = e.what();
    EXPECT_NE(msg.find("learnig_rate"), std::string::npos);
    EXPECT_NE(msg.find("cfg.ini:4"), std::string::npos);
  }
}

TEST(Config, OtherParseErrors) {
  EXPECT_THROW(ConfigFile::parse("[nope]\n", "x"), ConfigError);
  EXPECT_THROW(ConfigFile::parse("kind = quad\n", "x"), ConfigError);
  EXPECT_THROW(ConfigFile::parse("[objective]\nkind quad\n", "x"), ConfigError);
  EXPECT_THROW(ConfigFile::parse("[objective]\nkind = a\nkind = b\n", "x"), ConfigError);
  const auto c = ConfigFile::parse("[protocol]\nepochs = ten\n", "x");
  try {
    c.get_size("protocol", "epochs", 1);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(Config, BadEnumValueCarriesLine) {
  std::string text = kQuad;
  text.replace(text.find("kind = sgd"), 10, "kind = sgdd");
  const auto c = ConfigFile::parse(text, "q.ini");
  try {
    plan_from_config(c);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.line(), 9u);
  }
}

TEST(Config, PlanFromConfig) {
  const TrainPlan p = plan_from_config(ConfigFile::parse(kQuad, "q.ini"));
  EXPECT_EQ(p.objective.kind, ObjectiveKind::quad);
  EXPECT_EQ(p.objective.dim, 8u);
  EXPECT_EQ(p.schedule.lr, 0.25);
  EXPECT_EQ(p.epochs, 12u);
  EXPECT_EQ(p.schedule.total_epochs, 12u);
  EXPECT_EQ(p.master_seed, 2u);
  EXPECT_TRUE(p.exclude_final_epoch);
  EXPECT_EQ(p.output_dir, fs::path("runs/q"));
}

TEST(Config, SweepPoints) {
  const std::string text = std::string(kQuad) +
                           "\n[sweep]\naxis = batch_size\nvalues = 64, 256\nlr_scaling = sqrt\n"
                           "lr_base_batch = 64\n";
  const auto c = ConfigFile::parse(text, "s.ini");
  const TrainPlan base = plan_from_config(c);
  const SweepSpec s = sweep_from_config(c);
  const TrainPlan p1 = sweep_point(base, s, 1);
  EXPECT_EQ(p1.batch_size, 256u);
  EXPECT_DOUBLE_EQ(p1.schedule.lr, 0.5);
  EXPECT_EQ(p1.run_id, "q_batch_size_256");
  EXPECT_EQ(p1.output_dir, fs::path("runs/q/batch_size_256"));

  const auto opt = ConfigFile::parse(std::string(kQuad) +
                                         "\n[sweep]\naxis = optimizer\nvalues = sgd, adam\n"
                                         "lr_values = 0.1, 0.01\n",
                                     "o.ini");
  const auto so = sweep_from_config(opt);
  const TrainPlan a = sweep_point(plan_from_config(opt), so, 1);
  EXPECT_EQ(a.optimizer.kind, OptimizerKind::adam);
  EXPECT_EQ(a.schedule.lr, 0.01);

  EXPECT_THROW(sweep_from_config(ConfigFile::parse("[sweep]\naxis = lr\nvalues = 1\n", "x")),
               ConfigError);
  EXPECT_THROW(sweep_from_config(ConfigFile::parse("[sweep]\naxis = seed\nvalues = 1,x\n", "x")),
               ConfigError);
}

TEST(Commands, MeasureQuadraticWritesFourArtifacts) {
  const auto dir = temp_dir("cmd_measure");
  CommandOptions o;
  o.config = write_file(dir / "q.ini", kQuad).string();
  o.out = dir / "run";
  std::ostringstream out, err;
  EXPECT_EQ(cmd_measure(o, out, err), kExitOk) << err.str();
  for (const char* f : {"manifest.json", "wstar.tgw", "steps.csv", "epochs.csv"}) {
    EXPECT_TRUE(fs::exists(dir / "run" / f)) << f;
  }
  EXPECT_NE(out.str().find("final_loss"), std::string::npos);
  EXPECT_NE(out.str().find("mean_gamma (final epoch excluded)"), std::string::npos);

  // re-run from the manifest
  CommandOptions again;
  again.config = (dir / "run" / "manifest.json").string();
  again.out = dir / "again";
  EXPECT_EQ(cmd_measure(again, out, err), kExitOk) << err.str();
  EXPECT_EQ(slurp(dir / "again" / "wstar.tgw"), slurp(dir / "run" / "wstar.tgw"));
  EXPECT_EQ(slurp(dir / "again" / "steps.csv"), slurp(dir / "run" / "steps.csv"));
}

TEST(Commands, ExitStatuses) {
  const auto dir = temp_dir("cmd_exit");
  std::ostringstream out, err;
  CommandOptions o;
  o.out = dir / "r";

  std::string typo = kQuad;
  typo.replace(typo.find("lr = 0.25"), 9, "learnig_rate = 0.25");
  o.config = write_file(dir / "typo.ini", typo).string();
  EXPECT_EQ(cmd_measure(o, out, err), kExitConfig);
  EXPECT_NE(err.str().find("learnig_rate"), std::string::npos);
  EXPECT_NE(err.str().find(":12:"), std::string::npos);

  std::string diverge = kQuad;
  diverge.replace(diverge.find("lr = 0.25"), 9, "lr = 5.0");
  diverge.replace(diverge.find("epochs = 12"), 11, "epochs = 900");
  o.config = write_file(dir / "div.ini", diverge).string();
  err.str("");
  EXPECT_EQ(cmd_measure(o, out, err), kExitDivergence);
  EXPECT_NE(err.str().find("step"), std::string::npos);

  o.config = (dir / "missing.ini").string();
  EXPECT_EQ(cmd_measure(o, out, err), kExitConfig);

  o.config = write_file(dir / "conv.ini", "[converge]\nmu = 1\nL = 10\nd = 20\nT = 50\n"
                                          "tolerance = -1\n").string();
  EXPECT_EQ(cmd_converge(o, out, err), kExitTolerance);
}

TEST(Commands, ConvergePrintsBoundRatio) {
  const auto dir = temp_dir("cmd_conv");
  CommandOptions o;
  o.config = write_file(dir / "c.ini", "[converge]\nmu = 1\nL = 10\nd = 50\nT = 200\n").string();
  o.out = dir;
  std::ostringstream out, err;
  EXPECT_EQ(cmd_converge(o, out, err), kExitOk);
  EXPECT_NE(out.str().find("bound ratio ≤ 1"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "convergence.csv"));
}

TEST(Commands, GradcheckAllObjectives) {
  const auto dir = temp_dir("cmd_gc");
  CommandOptions o;
  o.config = write_file(dir / "g.ini", "[gradcheck]\nseed = 3\n").string();
  o.out = dir;
  std::ostringstream out, err;
  EXPECT_EQ(cmd_gradcheck(o, out, err), kExitOk) << out.str();
  for (const auto& row : run_gradcheck(GradCheckConfig{})) {
    EXPECT_LT(row.max_rel_error, 1e-5) << row.objective;
    EXPECT_LE(row.dim, 100u);
  }
}

TEST(Commands, SweepContinuesPastFailures) {
  const auto dir = temp_dir("cmd_sweep");
  const std::string text = std::string(kQuad) + "\n[sweep]\naxis = seed\nvalues = 1, 2, 3\n";
  CommandOptions o;
  o.config = write_file(dir / "s.ini", text).string();
  o.out = dir / "sweep";
  o.jobs = 2;
  std::ostringstream out, err;
  EXPECT_EQ(cmd_sweep(o, out, err), kExitOk) << err.str();
  const auto csv = slurp(dir / "sweep" / "sweep.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "swept_value,epoch,metric,mean,min,max");
  std::set<std::string> series;
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  while (std::getline(lines, line)) series.insert(line.substr(0, line.find(',')));
  EXPECT_EQ(series, (std::set<std::string>{"1", "2", "3"}));
  for (const char* sub : {"seed_1", "seed_2", "seed_3"}) {
    EXPECT_TRUE(fs::exists(dir / "sweep" / sub / "manifest.json")) << sub;
  }

  // a diverging point is recorded, the others still run
  std::string lr = std::string(kQuad);
  lr.replace(lr.find("epochs = 12"), 11, "epochs = 900");
  lr += "\n[sweep]\naxis = seed\nvalues = 1, 2\nlr_values = 0.25, 5.0\n";
  o.config = write_file(dir / "f.ini", lr).string();
  o.out = dir / "fail";
  out.str("");
  EXPECT_EQ(cmd_sweep(o, out, err), kExitDivergence);
  const auto summary = slurp(dir / "fail" / "sweep_summary.csv");
  EXPECT_NE(summary.find("\n1,q_seed_1,0,"), std::string::npos) << summary;
  EXPECT_NE(summary.find("\n2,q_seed_2,3,"), std::string::npos) << summary;
}

TEST(Commands, SweepResultsIndependentOfJobs) {
  const auto dir = temp_dir("cmd_sweep_jobs");
  const std::string text = std::string(kQuad) + "\n[sweep]\naxis = seed\nvalues = 4, 5, 6\n";
  CommandOptions o;
  o.config = write_file(dir / "s.ini", text).string();
  std::ostringstream out, err;
  o.out = dir / "a";
  o.jobs = 1;
  ASSERT_EQ(cmd_sweep(o, out, err), kExitOk);
  o.out = dir / "b";
  o.jobs = 3;
  ASSERT_EQ(cmd_sweep(o, out, err), kExitOk);
  EXPECT_EQ(slurp(dir / "a" / "sweep.csv"), slurp(dir / "b" / "sweep.csv"));
}

TEST(Report, SingleRunOnePolylineOneBandDeterministic) {
  const auto dir = temp_dir("cmd_report");
  CommandOptions o;
  o.config = write_file(dir / "q.ini", kQuad).string();
  o.out = dir / "run";
  std::ostringstream out, err;
  ASSERT_EQ(cmd_measure(o, out, err), kExitOk);
  const auto before = slurp(dir / "run" / "epochs.csv");

  ReportOptions r;
  r.run_dirs = {dir / "run"};
  r.metrics = {"gamma", "eb"};
  r.out = dir / "fig1";
  ASSERT_EQ(cmd_report(r, out, err), kExitOk) << err.str();
  r.out = dir / "fig2";
  ASSERT_EQ(cmd_report(r, out, err), kExitOk);
  const auto svg = slurp(dir / "fig1" / "gamma.svg");
  EXPECT_EQ(svg, slurp(dir / "fig2" / "gamma.svg"));
  EXPECT_EQ(slurp(dir / "run" / "epochs.csv"), before);

  const std::regex poly("class=\"mean\"");
  const std::regex band("class=\"band\"");
  EXPECT_EQ(std::distance(std::sregex_iterator(svg.begin(), svg.end(), poly), std::sregex_iterator()), 1);
  EXPECT_EQ(std::distance(std::sregex_iterator(svg.begin(), svg.end(), band), std::sregex_iterator()), 1);
  EXPECT_NE(svg.find(">q</text>"), std::string::npos);  // legend names the run

  r.band = false;
  r.out = dir / "fig3";
  ASSERT_EQ(cmd_report(r, out, err), kExitOk);
  EXPECT_EQ(slurp(dir / "fig3" / "gamma.svg").find("class=\"band\""), std::string::npos);
}

TEST(Report, BadInputs) {
  const auto dir = temp_dir("cmd_report_bad");
  std::ostringstream out, err;
  ReportOptions r;
  r.run_dirs = {dir};
  r.out = dir / "fig";
  EXPECT_EQ(cmd_report(r, out, err), kExitFailure);
  EXPECT_NE(err.str().find("epochs.csv"), std::string::npos);

  write_file(dir / "epochs.csv", "epoch,gamma_avg\n");
  err.str("");
  EXPECT_NE(cmd_report(r, out, err), kExitOk);
  EXPECT_NE(err.str().find("gamma_avg"), std::string::npos);

  r.metrics = {"loss"};
  EXPECT_EQ(cmd_report(r, out, err), kExitConfig);
}

TEST(Report, LogScaleSkipsNonPositive) {
  RunSeries s;
  s.run_id = "x";
  for (std::size_t e = 0; e < 3; ++e) {
    EpochAggregate a;
    a.epoch = e;
    a.count = 1;
    const double v = e == 1 ? -1.0 : std::pow(10.0, -static_cast<double>(e));
    for (auto& st : a.stats) st = Stats{v, v, v};
    s.epochs.push_back(a);
  }
  const auto svg = render_svg(FigureSpec{Metric::rsi, false, true}, std::vector<RunSeries>{s});
  EXPECT_NE(svg.find("data-log=\"1\""), std::string::npos);
  const auto at = svg.find("class=\"mean\"");
  const auto pts = svg.substr(at, svg.find("\"", svg.find("points=\"", at) + 8) - at);
  EXPECT_EQ(std::count(pts.begin(), pts.end(), ','), 2);
}

TEST(Report, BaselineDirectories) {
  const auto dir = temp_dir("cmd_report_baseline");
  std::ostringstream out, err;
  CommandOptions c;
  c.config = write_file(dir / "c.ini", "[converge]\nmu = 1\nL = 10\nd = 20\nT = 50\n").string();
  c.out = dir / "conv";
  ASSERT_EQ(cmd_converge(c, out, err), kExitOk);
  CommandOptions w;
  w.config = write_file(dir / "w.ini", "[walk]\nd = 2000\nT = 20\nreplicates = 2\n").string();
  w.out = dir / "walk";
  cmd_walk(w, out, err);  // bands may miss at this size; only the CSV matters
  ASSERT_TRUE(fs::exists(dir / "walk" / "walk.csv"));

  ReportOptions r;
  r.run_dirs = {dir / "conv", dir / "walk"};
  r.log_scale = true;
  r.out = dir / "fig";
  ASSERT_EQ(cmd_report(r, out, err), kExitOk) << err.str();
  for (const char* f : {"convergence_log.svg", "walk_ratio_log.svg", "walk_cosine_log.svg"}) {
    std::ifstream in(dir / "fig" / f);
    std::stringstream svg;
    svg << in.rdbuf();
    const std::string s = svg.str();
    EXPECT_TRUE(s.find("data-run=\"predicted\"") != std::string::npos ||
                s.find("data-run=\"bound\"") != std::string::npos)
        << f;
    EXPECT_NE(s.find("data-run=\"observed\""), std::string::npos) << f;
    EXPECT_EQ(s.find("class=\"band\""), std::string::npos) << f;
  }
  // convergence has T + 1 points per curve
  std::ifstream in(dir / "fig" / "convergence_log.svg");
  std::stringstream svg;
  svg << in.rdbuf();
  const std::string s = svg.str();
  const auto at = s.find("data-run=\"observed\"");
  const auto pts = s.substr(at, s.find("\"", s.find("points=\"", at) + 8) - at);
  EXPECT_EQ(std::count(pts.begin(), pts.end(), ','), 51);

  r.run_dirs = {dir / "conv", dir / "conv"};
  EXPECT_EQ(cmd_report(r, out, err), kExitFailure);
}
