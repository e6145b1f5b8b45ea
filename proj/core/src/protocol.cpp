#include "trajgeom/protocol.hpp"

#include <bit>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iterator>
#include <map>
#include <random>

#include "json.hpp"
#include "trajgeom/errors.hpp"
#include "trajgeom/records_io.hpp"
#include "trajgeom/sampler.hpp"

namespace trajgeom {

using nlohmann::json;

std::string code_version() { return TRAJGEOM_VERSION; }

// ---------------------------------------------------------------------------
// Checkpoint

void write_checkpoint(const std::filesystem::path& path, const ParamVector& w) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out.write("TGW1", 4);
  auto put_le = [&out](std::uint64_t v) {
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>(v >> (8 * i));
    out.write(b, 8);
  };
  put_le(w.dim());
  for (double v : w.values()) put_le(std::bit_cast<std::uint64_t>(v));
  if (!out) throw Error("write failed: " + path.string());
}

ParamVector read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  const std::vector<unsigned char> bytes{std::istreambuf_iterator<char>(in),
                                         std::istreambuf_iterator<char>()};
  const std::string where = path.string();
  if (bytes.size() < 12) {
    throw ParseError(where + ": truncated checkpoint: expected at least 12 bytes, got " +
                         std::to_string(bytes.size()),
                     bytes.size());
  }
  if (bytes[0] != 'T' || bytes[1] != 'G' || bytes[2] != 'W' || bytes[3] != '1') {
    throw ParseError(where + ": bad checkpoint magic at byte 0 (want \"TGW1\")", 0);
  }
  auto get_le = [&bytes](std::size_t off) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | bytes[off + i];
    return v;
  };
  const std::uint64_t dim = get_le(4);
  if (dim > (bytes.size() - 12) / 8 || bytes.size() != 12 + 8 * dim) {
    throw ParseError(where + ": expected " + std::to_string(12 + 8 * dim) +
                         " bytes for dim " + std::to_string(dim) + ", got " +
                         std::to_string(bytes.size()),
                     bytes.size());
  }
  std::vector<double> values(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    values[i] = std::bit_cast<double>(get_le(12 + 8 * i));
  }
  return ParamVector(std::move(values));
}

// ---------------------------------------------------------------------------
// Training loop shared by both passes

namespace {

std::uint64_t wall_clock_entropy() {
  const auto ns = std::chrono::high_resolution_clock::now().time_since_epoch().count();
  std::random_device rd;
  return mix64(static_cast<std::uint64_t>(ns)) ^ (std::uint64_t{rd()} << 32 | rd());
}

struct PassOutput {
  ParamVector w;
  HashChain chain;
  std::vector<double> losses;
  std::vector<StepRecord> records;
  std::size_t steps = 0;
  std::size_t steps_per_epoch = 0;
};

// One run of the plan. With `wstar`, each step is measured against it before
// the update; with `expected`, every hash link is checked as it is produced.
PassOutput run_pass(const TrainPlan& plan, const Objective& objective,
                    const ParamVector* wstar, const HashChain* expected) {
  plan.validate();
  const std::size_t n = objective.sample_count();
  std::optional<MinibatchSchedule> batches;
  PassOutput out;
  if (n > 0) {
    batches.emplace(plan.master_seed, n, plan.batch_size, plan.epochs, plan.drop_last);
    out.steps_per_epoch = batches->steps_per_epoch();
  } else {
    out.steps_per_epoch = plan.steps_per_epoch;
  }
  if (out.steps_per_epoch == 0) throw Error("plan yields zero steps per epoch");
  out.steps = out.steps_per_epoch * plan.epochs;

  RandomStream init(plan.inject_time_seed ? plan.master_seed ^ wall_clock_entropy()
                                          : plan.master_seed,
                    "init");
  out.w = objective.initial_point(init);
  if (wstar && wstar->dim() != out.w.dim()) throw DimensionError(out.w.dim(), wstar->dim());
  OptimizerState optimizer(plan.optimizer, out.w.dim());

  auto check_link = [&](std::size_t t) {
    if (expected && (t >= expected->size() || expected->links()[t] != out.chain.back())) {
      throw ReplayMismatchError(t);
    }
  };

  out.chain.push(out.w);
  check_link(0);
  if (!wstar) out.losses.reserve(out.steps);
  else out.records.reserve(out.steps);

  for (std::size_t t = 0; t < out.steps; ++t) {
    const std::size_t epoch = t / out.steps_per_epoch;
    const double lr = schedule_lr(plan.schedule, epoch);
    const std::span<const std::size_t> batch =
        batches ? batches->next_batch(t) : std::span<const std::size_t>{};

    LossGrad lg = objective.evaluate(out.w, batch);
    if (plan.weight_decay > 0.0) axpy_inplace(plan.weight_decay, out.w, lg.grad);
    if (!std::isfinite(lg.loss) || !lg.grad.all_finite()) throw DivergenceError(t);

    if (wstar) {
      const Measurement m = measure(lg.grad, out.w, *wstar);
      StepRecord r;
      r.run_id = plan.run_id;
      r.t = t;
      r.epoch = epoch;
      r.loss = lg.loss;
      r.lr = lr;
      r.rsi = m.rsi;
      r.eb = m.eb;
      r.gamma = m.gamma;
      r.lo_lr = m.lo_lr;
      r.dist = m.dist;
      r.degenerate = m.degenerate;
      out.records.push_back(std::move(r));
    } else {
      out.losses.push_back(lg.loss);
    }

    optimizer.step(out.w, lg.grad, lr);
    if (!out.w.all_finite()) throw DivergenceError(t);
    out.chain.push(out.w);
    check_link(t + 1);
  }
  return out;
}

std::vector<std::size_t> all_indices(std::size_t n) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  return idx;
}

}  // namespace

PassOneResult pass_one(const TrainPlan& plan, const Objective& objective) {
  PassOutput out = run_pass(plan, objective, nullptr, nullptr);
  PassOneResult r;
  const auto everything = all_indices(objective.sample_count());
  r.final_loss = objective.evaluate(out.w, everything).loss;
  r.wstar = std::move(out.w);
  r.chain = std::move(out.chain);
  r.losses = std::move(out.losses);
  r.steps = out.steps;
  r.steps_per_epoch = out.steps_per_epoch;
  return r;
}

PassOneResult pass_one(const TrainPlan& plan) {
  const auto objective = make_objective(plan.objective, plan.master_seed);
  return pass_one(plan, *objective);
}

PassTwoResult pass_two(const TrainPlan& plan, const Objective& objective,
                       const ParamVector& wstar, const HashChain* expected) {
  PassOutput out = run_pass(plan, objective, &wstar, expected);
  if (!out.w.bitwise_equal(wstar)) throw ReplayMismatchError(out.steps);
  return {std::move(out.records), std::move(out.chain)};
}

PassTwoResult pass_two(const TrainPlan& plan, const ParamVector& wstar,
                       const HashChain* expected) {
  const auto objective = make_objective(plan.objective, plan.master_seed);
  return pass_two(plan, *objective, wstar, expected);
}

ReplayReport verify_replay(const TrainPlan& plan) {
  const auto objective = make_objective(plan.objective, plan.master_seed);
  const PassOutput a = run_pass(plan, *objective, nullptr, nullptr);
  const PassOutput b = run_pass(plan, *objective, nullptr, nullptr);
  ReplayReport report;
  report.steps = a.steps;
  report.first_divergent_step = a.chain.first_divergence(b.chain);
  if (!report.first_divergent_step && a.chain.size() != b.chain.size()) {
    report.first_divergent_step = std::min(a.chain.size(), b.chain.size());
  }
  report.identical = !report.first_divergent_step.has_value();
  return report;
}

// ---------------------------------------------------------------------------
// run_protocol

namespace {

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json conventions(const TrainPlan& plan) {
  json c;
  c["momentum"] = "heavy-ball: v <- beta*v + g; w <- w - lr*v; no dampening, no nesterov";
  c["adam"] = "bias-corrected: w <- w - lr*m_hat/(sqrt(v_hat)+epsilon)";
  c["weight_decay"] = "coupled: g <- g + weight_decay*w before measurement and update";
  c["measurement"] = "raw minibatch gradient at w_t, measured before the update of step t";
  c["reference_point"] = "final iterate of pass one";
  c["schedule"] = "per-epoch constant learning rate";
  if (plan.objective.kind == ObjectiveKind::alm) {
    c["alm_form"] = std::string(to_string(plan.objective.alm_form));
  }
  return c;
}

void write_manifest(const std::filesystem::path& path, const json& manifest) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << manifest.dump(2) << '\n';
  if (!out) throw Error("write failed: " + path.string());
}

}  // namespace

RunArtifacts run_protocol(const TrainPlan& plan,
                          const std::map<std::string, std::string>& config_echo) {
  if (plan.output_dir.empty()) throw Error("plan: output_dir is required");
  plan.validate();
  std::filesystem::create_directories(plan.output_dir);

  RunArtifacts art;
  art.manifest = plan.output_dir / kManifestFile;
  art.checkpoint = plan.output_dir / kCheckpointFile;
  art.steps_csv = plan.output_dir / kStepsFile;
  art.epochs_csv = plan.output_dir / kEpochsFile;

  json manifest;
  manifest["format"] = "trajgeom-manifest/1";
  manifest["code_version"] = code_version();
  manifest["status"] = "incomplete";
  manifest["started_at"] = utc_now();
  manifest["plan"] = json::parse(plan.to_json());
  manifest["conventions"] = conventions(plan);
  if (!config_echo.empty()) manifest["config"] = config_echo;

  try {
    const auto objective = make_objective(plan.objective, plan.master_seed);
    manifest["dim"] = objective->dim();

    PassOneResult one = pass_one(plan, *objective);
    write_checkpoint(art.checkpoint, one.wstar);
    const ParamVector wstar = read_checkpoint(art.checkpoint);

    PassTwoResult two = pass_two(plan, *objective, wstar, &one.chain);

    art.records = std::move(two.records);
    art.epochs = aggregate_epochs(art.records, plan.exclude_final_epoch);
    art.final_loss = one.final_loss;
    const std::size_t end_epoch =
        plan.exclude_final_epoch ? plan.epochs - 1 : plan.epochs;
    art.mean_gamma = mean_metric(art.records, Metric::gamma, 0, end_epoch);

    write_steps_csv(art.steps_csv, art.records);
    write_epochs_csv(art.epochs_csv, art.epochs);

    std::vector<std::string> links;
    links.reserve(one.chain.size());
    for (auto h : one.chain.links()) links.push_back(HashChain::to_hex(h));
    std::size_t degenerate = 0;
    for (const auto& r : art.records) degenerate += r.degenerate ? 1 : 0;

    manifest["steps"] = one.steps;
    manifest["steps_per_epoch"] = one.steps_per_epoch;
    manifest["passes"] = json::array(
        {{{"id", "pass1"}, {"final_hash", HashChain::to_hex(one.chain.back())}},
         {{"id", "pass2"}, {"final_hash", HashChain::to_hex(two.chain.back())}}});
    manifest["hash_chain"] = links;
    manifest["final_loss"] = art.final_loss;
    json summary;
    summary["mean_gamma_excluding_final_epoch"] =
        art.mean_gamma ? json(*art.mean_gamma) : json(nullptr);
    const auto kappa = kappa_hat(art.records);
    summary["kappa_hat"] = kappa ? json(*kappa) : json(nullptr);
    summary["degenerate_steps"] = degenerate;
    manifest["summary"] = summary;
    manifest["artifacts"] = {kManifestFile, kCheckpointFile, kStepsFile, kEpochsFile};
    manifest["status"] = "complete";
    manifest["finished_at"] = utc_now();
    write_manifest(art.manifest, manifest);
  } catch (const std::exception& e) {
    manifest["error"] = e.what();
    manifest["finished_at"] = utc_now();
    write_manifest(art.manifest, manifest);
    throw;
  }
  return art;
}

}  // namespace trajgeom
