#include "trajgeom/plan.hpp"

#include <cmath>

#include "json.hpp"
#include "trajgeom/errors.hpp"

namespace trajgeom {

using nlohmann::json;

std::string_view to_string(ObjectiveKind kind) {
  switch (kind) {
    case ObjectiveKind::mlp: return "mlp";
    case ObjectiveKind::alm: return "alm";
    case ObjectiveKind::sm: return "sm";
    case ObjectiveKind::quad: return "quad";
  }
  return "?";
}

ObjectiveKind parse_objective_kind(std::string_view text) {
  if (text == "mlp") return ObjectiveKind::mlp;
  if (text == "alm") return ObjectiveKind::alm;
  if (text == "sm") return ObjectiveKind::sm;
  if (text == "quad") return ObjectiveKind::quad;
  throw Error("unknown objective '" + std::string(text) + "' (mlp|alm|sm|quad)");
}

std::string_view to_string(DataKind kind) {
  switch (kind) {
    case DataKind::none: return "none";
    case DataKind::blobs: return "blobs";
    case DataKind::regression: return "regression";
    case DataKind::idx: return "idx";
    case DataKind::csv: return "csv";
  }
  return "?";
}

DataKind parse_data_kind(std::string_view text) {
  if (text == "none") return DataKind::none;
  if (text == "blobs") return DataKind::blobs;
  if (text == "regression") return DataKind::regression;
  if (text == "idx") return DataKind::idx;
  if (text == "csv") return DataKind::csv;
  throw Error("unknown dataset '" + std::string(text) +
              "' (none|blobs|regression|idx|csv)");
}

std::string_view to_string(AlmForm form) {
  return form == AlmForm::rmse ? "rmse" : "squared_hinge";
}

AlmForm parse_alm_form(std::string_view text) {
  if (text == "rmse") return AlmForm::rmse;
  if (text == "squared_hinge") return AlmForm::squared_hinge;
  throw Error("unknown ALM form '" + std::string(text) + "' (rmse|squared_hinge)");
}

void TrainPlan::validate() const {
  if (run_id.empty() || run_id.find_first_of(",\n\r") != std::string::npos) {
    throw Error("plan: run_id must be non-empty and free of commas and newlines");
  }
  if (epochs == 0) throw Error("plan: epochs must be positive");
  if (batch_size == 0) throw Error("plan: batch_size must be positive");
  if (steps_per_epoch == 0) throw Error("plan: steps_per_epoch must be positive");
  if (!(weight_decay >= 0.0) || !std::isfinite(weight_decay)) {
    throw Error("plan: weight_decay must be finite and >= 0");
  }
  if (schedule.total_epochs != epochs) {
    throw Error("plan: schedule total epochs differ from plan epochs");
  }
  schedule.validate();

  const auto& o = objective;
  const auto& d = o.data;
  switch (o.kind) {
    case ObjectiveKind::mlp:
      if (d.kind != DataKind::blobs && d.kind != DataKind::idx && d.kind != DataKind::csv) {
        throw Error("plan: mlp needs a blobs, idx or csv dataset");
      }
      break;
    case ObjectiveKind::alm:
      if (d.kind != DataKind::regression && d.kind != DataKind::csv) {
        throw Error("plan: alm needs a regression or csv dataset");
      }
      break;
    case ObjectiveKind::sm:
    case ObjectiveKind::quad:
      if (o.dim == 0) throw Error("plan: dim must be positive");
      if (d.kind != DataKind::none) throw Error("plan: sm and quad take no dataset");
      break;
  }
  if (o.kind == ObjectiveKind::quad) {
    if (!(o.mu > 0.0) || !(o.L > 0.0)) throw Error("plan: mu and L must be positive");
    if (o.mu > o.L) throw Error("plan: mu must not exceed L");
  }
  if (d.kind == DataKind::blobs || d.kind == DataKind::regression) {
    if (d.n == 0 || d.p == 0) throw Error("plan: dataset n and p must be positive");
  }
  if ((d.kind == DataKind::idx || d.kind == DataKind::csv) && d.path.empty()) {
    throw Error("plan: dataset path is required");
  }
}

std::string TrainPlan::to_json() const {
  const auto& o = objective;
  const auto& d = o.data;
  json j;
  j["run_id"] = run_id;
  j["master_seed"] = master_seed;
  j["objective"] = {
      {"kind", to_string(o.kind)},
      {"hidden", o.hidden},
      {"alm_form", to_string(o.alm_form)},
      {"dim", o.dim},
      {"mu", o.mu},
      {"L", o.L},
      {"init_scale", o.init_scale},
      {"data",
       {{"kind", to_string(d.kind)},
        {"n", d.n},
        {"p", d.p},
        {"classes", d.classes},
        {"spread", d.spread},
        {"path", d.path.string()},
        {"labels_path", d.labels_path.string()},
        {"label_column", d.label_column},
        {"feature_scale", d.feature_scale}}}};
  j["optimizer"] = {{"kind", to_string(optimizer.kind)},
                    {"momentum", optimizer.momentum},
                    {"beta1", optimizer.beta1},
                    {"beta2", optimizer.beta2},
                    {"epsilon", optimizer.epsilon}};
  j["schedule"] = {{"kind", to_string(schedule.kind)},
                   {"lr", schedule.lr},
                   {"warmup_epochs", schedule.warmup_epochs}};
  j["batch_size"] = batch_size;
  j["epochs"] = epochs;
  j["steps_per_epoch"] = steps_per_epoch;
  j["drop_last"] = drop_last;
  j["weight_decay"] = weight_decay;
  j["exclude_final_epoch"] = exclude_final_epoch;
  j["inject_time_seed"] = inject_time_seed;
  j["output_dir"] = output_dir.string();
  return j.dump(2);
}

TrainPlan TrainPlan::from_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    TrainPlan p;
    p.run_id = j.at("run_id").get<std::string>();
    p.master_seed = j.at("master_seed").get<std::uint64_t>();
    const auto& o = j.at("objective");
    p.objective.kind = parse_objective_kind(o.at("kind").get<std::string>());
    p.objective.hidden = o.at("hidden").get<std::vector<std::size_t>>();
    p.objective.alm_form = parse_alm_form(o.at("alm_form").get<std::string>());
    p.objective.dim = o.at("dim").get<std::size_t>();
    p.objective.mu = o.at("mu").get<double>();
    p.objective.L = o.at("L").get<double>();
    p.objective.init_scale = o.at("init_scale").get<double>();
    const auto& d = o.at("data");
    auto& pd = p.objective.data;
    pd.kind = parse_data_kind(d.at("kind").get<std::string>());
    pd.n = d.at("n").get<std::size_t>();
    pd.p = d.at("p").get<std::size_t>();
    pd.classes = d.at("classes").get<std::size_t>();
    pd.spread = d.at("spread").get<double>();
    pd.path = d.at("path").get<std::string>();
    pd.labels_path = d.at("labels_path").get<std::string>();
    pd.label_column = d.at("label_column").get<std::string>();
    pd.feature_scale = d.at("feature_scale").get<double>();
    const auto& opt = j.at("optimizer");
    p.optimizer.kind = parse_optimizer_kind(opt.at("kind").get<std::string>());
    p.optimizer.momentum = opt.at("momentum").get<double>();
    p.optimizer.beta1 = opt.at("beta1").get<double>();
    p.optimizer.beta2 = opt.at("beta2").get<double>();
    p.optimizer.epsilon = opt.at("epsilon").get<double>();
    const auto& s = j.at("schedule");
    p.schedule.kind = parse_schedule_kind(s.at("kind").get<std::string>());
    p.schedule.lr = s.at("lr").get<double>();
    p.schedule.warmup_epochs = s.at("warmup_epochs").get<std::size_t>();
    p.batch_size = j.at("batch_size").get<std::size_t>();
    p.epochs = j.at("epochs").get<std::size_t>();
    p.schedule.total_epochs = p.epochs;
    p.steps_per_epoch = j.at("steps_per_epoch").get<std::size_t>();
    p.drop_last = j.at("drop_last").get<bool>();
    p.weight_decay = j.at("weight_decay").get<double>();
    p.exclude_final_epoch = j.at("exclude_final_epoch").get<bool>();
    p.inject_time_seed = j.at("inject_time_seed").get<bool>();
    p.output_dir = j.at("output_dir").get<std::string>();
    return p;
  } catch (const json::exception& e) {
    throw Error(std::string("plan JSON: ") + e.what());
  }
}

std::shared_ptr<const Objective> make_objective(const ObjectiveSpec& spec,
                                                std::uint64_t master_seed) {
  RandomStream data_stream(master_seed, "data");
  const auto& ds = spec.data;

  auto load = [&]() -> std::shared_ptr<Dataset> {
    Dataset d;
    switch (ds.kind) {
      case DataKind::blobs:
        d = gen_blobs(data_stream, ds.n, ds.p, ds.classes, ds.spread);
        break;
      case DataKind::regression:
        d = gen_regression(data_stream, ds.n, ds.p);
        break;
      case DataKind::idx:
        d = load_idx(ds.path, ds.labels_path.empty()
                                  ? std::nullopt
                                  : std::optional<std::filesystem::path>(ds.labels_path));
        break;
      case DataKind::csv:
        d = load_csv(ds.path, ds.label_column,
                     spec.kind == ObjectiveKind::alm ? LabelKind::regression
                                                     : LabelKind::classification);
        break;
      case DataKind::none:
        throw Error("objective needs a dataset");
    }
    if (ds.feature_scale != 1.0) {
      for (double& v : d.features) v *= ds.feature_scale;
    }
    return std::make_shared<Dataset>(std::move(d));
  };

  switch (spec.kind) {
    case ObjectiveKind::mlp:
      return std::make_shared<MlpObjective>(load(), spec.hidden);
    case ObjectiveKind::alm:
      return std::make_shared<AlmObjective>(load(), spec.alm_form, spec.init_scale);
    case ObjectiveKind::sm:
      return std::make_shared<SmObjective>(
          SmObjective::random(data_stream, spec.dim, spec.init_scale));
    case ObjectiveKind::quad: {
      auto spectrum = spanning_spectrum(data_stream, spec.dim, spec.mu, spec.L);
      ParamVector minimizer = ParamVector::zeros(spec.dim);
      for (std::size_t i = 0; i < spec.dim; ++i) minimizer[i] = data_stream.gauss();
      return std::make_shared<QuadObjective>(std::move(spectrum), std::move(minimizer),
                                             spec.init_scale);
    }
  }
  throw Error("unknown objective kind");
}

}  // namespace trajgeom
