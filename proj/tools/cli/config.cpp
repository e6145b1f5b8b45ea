#include "cli/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace trajgeom::cli {

namespace {

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s = {
      {"objective",
       {"kind", "hidden", "alm_form", "dim", "mu", "L", "init_scale", "dataset",
        "n", "p", "classes", "spread", "path", "labels_path", "label_column",
        "feature_scale"}},
      {"optimizer", {"kind", "momentum", "beta1", "beta2", "epsilon", "weight_decay"}},
      {"schedule", {"kind", "lr", "warmup_epochs"}},
      {"protocol",
       {"run_id", "seed", "epochs", "batch_size", "steps_per_epoch", "drop_last",
        "exclude_final_epoch", "inject_time_seed", "output_dir"}},
      {"sweep", {"axis", "values", "lr_values", "lr_scaling", "lr_base_batch"}},
      {"walk",
       {"d", "T", "s", "seed", "replicates", "min_remaining", "cosine_tolerance",
        "ratio_tolerance"}},
      {"converge", {"mu", "L", "d", "T", "seed", "tolerance"}},
      {"gradcheck", {"objectives", "eps", "tolerance", "seed"}},
      {"counterexample", {"expect"}},
  };
  return s;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(value);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <typename T>
bool parse_number(const std::string& text, T& out) {
  const char* first = text.data();
  const char* last = first + text.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

}  // namespace

ConfigFile ConfigFile::parse(const std::string& text, const std::string& source) {
  ConfigFile cfg;
  cfg.source_ = source;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  std::size_t line_no = 0;
  auto where = [&] { return source + ":" + std::to_string(line_no) + ": "; };
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where() + "malformed section header", line_no);
      section = trim(line.substr(1, line.size() - 2));
      if (!schema().count(section)) {
        throw ConfigError(where() + "unknown section [" + section + "]", line_no);
      }
      cfg.sections_[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(where() + "expected 'key = value'", line_no);
    }
    if (section.empty()) {
      throw ConfigError(where() + "key outside of any section", line_no);
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(where() + "empty key", line_no);
    if (!schema().at(section).count(key)) {
      throw ConfigError(where() + "unknown key '" + key + "' in [" + section + "]", line_no);
    }
    auto& entries = cfg.sections_[section];
    if (entries.count(key)) {
      throw ConfigError(where() + "duplicate key '" + key + "' in [" + section + "]", line_no);
    }
    entries[key] = Entry{value, line_no};
  }
  return cfg;
}

ConfigFile ConfigFile::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + path + "'", 0);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path);
}

bool ConfigFile::has_section(const std::string& section) const {
  return sections_.count(section) != 0;
}

bool ConfigFile::has(const std::string& section, const std::string& key) const {
  return find(section, key) != nullptr;
}

const ConfigFile::Entry* ConfigFile::find(const std::string& section,
                                          const std::string& key) const {
  auto s = sections_.find(section);
  if (s == sections_.end()) return nullptr;
  auto k = s->second.find(key);
  return k == s->second.end() ? nullptr : &k->second;
}

void ConfigFile::fail(const Entry& e, const std::string& section,
                      const std::string& key, const std::string& what) const {
  throw ConfigError(source_ + ":" + std::to_string(e.line) + ": [" + section + "] " +
                        key + " = '" + e.value + "': " + what,
                    e.line);
}

std::string ConfigFile::get_string(const std::string& section, const std::string& key,
                                   const std::string& fallback) const {
  const Entry* e = find(section, key);
  return e ? e->value : fallback;
}

double ConfigFile::get_double(const std::string& section, const std::string& key,
                              double fallback) const {
  const Entry* e = find(section, key);
  if (!e) return fallback;
  double v = 0.0;
  if (!parse_number(e->value, v) || !std::isfinite(v)) fail(*e, section, key, "expected a finite number");
  return v;
}

std::size_t ConfigFile::get_size(const std::string& section, const std::string& key,
                                 std::size_t fallback) const {
  const Entry* e = find(section, key);
  if (!e) return fallback;
  std::size_t v = 0;
  if (!parse_number(e->value, v)) fail(*e, section, key, "expected a non-negative integer");
  return v;
}

std::uint64_t ConfigFile::get_u64(const std::string& section, const std::string& key,
                                  std::uint64_t fallback) const {
  const Entry* e = find(section, key);
  if (!e) return fallback;
  std::uint64_t v = 0;
  if (!parse_number(e->value, v)) fail(*e, section, key, "expected a non-negative integer");
  return v;
}

bool ConfigFile::get_bool(const std::string& section, const std::string& key,
                          bool fallback) const {
  const Entry* e = find(section, key);
  if (!e) return fallback;
  if (e->value == "true" || e->value == "on" || e->value == "1") return true;
  if (e->value == "false" || e->value == "off" || e->value == "0") return false;
  fail(*e, section, key, "expected true or false");
}

std::vector<std::string> ConfigFile::get_list(const std::string& section,
                                              const std::string& key) const {
  const Entry* e = find(section, key);
  return e ? split_list(e->value) : std::vector<std::string>{};
}

std::vector<std::size_t> ConfigFile::get_size_list(const std::string& section,
                                                   const std::string& key) const {
  std::vector<std::size_t> out;
  for (const auto& item : get_list(section, key)) {
    std::size_t v = 0;
    if (!parse_number(item, v)) fail(*find(section, key), section, key, "expected integers");
    out.push_back(v);
  }
  return out;
}

std::vector<double> ConfigFile::get_double_list(const std::string& section,
                                                const std::string& key) const {
  std::vector<double> out;
  for (const auto& item : get_list(section, key)) {
    double v = 0.0;
    if (!parse_number(item, v) || !std::isfinite(v)) {
      fail(*find(section, key), section, key, "expected numbers");
    }
    out.push_back(v);
  }
  return out;
}

void ConfigFile::error_at(const std::string& section, const std::string& key,
                          const std::string& what) const {
  const Entry* e = key.empty() ? nullptr : find(section, key);
  const std::size_t line = e ? e->line : 0;
  std::string msg = source_ + ":";
  if (line) msg += std::to_string(line) + ":";
  msg += " [" + section + "]";
  if (!key.empty()) msg += " " + key;
  throw ConfigError(msg + ": " + what, line);
}

std::map<std::string, std::string> ConfigFile::flatten() const {
  std::map<std::string, std::string> out;
  for (const auto& [section, entries] : sections_) {
    for (const auto& [key, entry] : entries) out[section + "." + key] = entry.value;
  }
  return out;
}

namespace {

// Runs a core parser/validator and re-throws its message with the line of
// the offending entry.
template <typename F>
auto with_line(const ConfigFile& cfg, const std::string& section,
               const std::string& key, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    cfg.error_at(section, key, e.what());
  }
}

}  // namespace

TrainPlan plan_from_config(const ConfigFile& c) {
  TrainPlan plan;

  auto& obj = plan.objective;
  obj.kind = with_line(c, "objective", "kind", [&] {
    return parse_objective_kind(c.get_string("objective", "kind", "quad"));
  });
  obj.hidden = c.get_size_list("objective", "hidden");
  obj.alm_form = with_line(c, "objective", "alm_form", [&] {
    return parse_alm_form(c.get_string("objective", "alm_form", "rmse"));
  });
  obj.dim = c.get_size("objective", "dim", 0);
  obj.mu = c.get_double("objective", "mu", 1.0);
  obj.L = c.get_double("objective", "L", 1.0);
  obj.init_scale = c.get_double("objective", "init_scale", 1.0);
  auto& data = obj.data;
  data.kind = with_line(c, "objective", "dataset", [&] {
    return parse_data_kind(c.get_string("objective", "dataset", "none"));
  });
  data.n = c.get_size("objective", "n", 0);
  data.p = c.get_size("objective", "p", 0);
  data.classes = c.get_size("objective", "classes", 0);
  data.spread = c.get_double("objective", "spread", 1.0);
  data.path = c.get_string("objective", "path", "");
  data.labels_path = c.get_string("objective", "labels_path", "");
  data.label_column = c.get_string("objective", "label_column", "label");
  data.feature_scale = c.get_double("objective", "feature_scale", 1.0);

  plan.optimizer.kind = with_line(c, "optimizer", "kind", [&] {
    return parse_optimizer_kind(c.get_string("optimizer", "kind", "sgd"));
  });
  plan.optimizer.momentum = c.get_double("optimizer", "momentum", plan.optimizer.momentum);
  plan.optimizer.beta1 = c.get_double("optimizer", "beta1", plan.optimizer.beta1);
  plan.optimizer.beta2 = c.get_double("optimizer", "beta2", plan.optimizer.beta2);
  plan.optimizer.epsilon = c.get_double("optimizer", "epsilon", plan.optimizer.epsilon);
  plan.weight_decay = c.get_double("optimizer", "weight_decay", 0.0);

  plan.schedule.kind = with_line(c, "schedule", "kind", [&] {
    return parse_schedule_kind(c.get_string("schedule", "kind", "constant"));
  });
  plan.schedule.lr = c.get_double("schedule", "lr", plan.schedule.lr);
  plan.schedule.warmup_epochs = c.get_size("schedule", "warmup_epochs", 0);

  plan.run_id = c.get_string("protocol", "run_id", "run");
  plan.master_seed = c.get_u64("protocol", "seed", 0);
  plan.epochs = c.get_size("protocol", "epochs", 1);
  plan.schedule.total_epochs = plan.epochs;
  plan.batch_size = c.get_size("protocol", "batch_size", 1);
  plan.steps_per_epoch = c.get_size("protocol", "steps_per_epoch", 1);
  plan.drop_last = c.get_bool("protocol", "drop_last", true);
  plan.exclude_final_epoch = c.get_bool("protocol", "exclude_final_epoch", true);
  plan.inject_time_seed = c.get_bool("protocol", "inject_time_seed", false);
  plan.output_dir = c.get_string("protocol", "output_dir", "runs/" + plan.run_id);

  with_line(c, "protocol", "", [&] {
    plan.validate();
    return 0;
  });
  return plan;
}

std::string to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::batch_size: return "batch_size";
    case SweepAxis::optimizer: return "optimizer";
    case SweepAxis::seed: return "seed";
    case SweepAxis::epochs: return "epochs";
  }
  return "?";
}

SweepSpec sweep_from_config(const ConfigFile& c) {
  if (!c.has("sweep", "axis")) c.error_at("sweep", "axis", "required");
  if (!c.has("sweep", "values")) c.error_at("sweep", "values", "required");
  SweepSpec s;
  const std::string axis = c.get_string("sweep", "axis", "");
  if (axis == "batch_size") s.axis = SweepAxis::batch_size;
  else if (axis == "optimizer") s.axis = SweepAxis::optimizer;
  else if (axis == "seed") s.axis = SweepAxis::seed;
  else if (axis == "epochs") s.axis = SweepAxis::epochs;
  else c.error_at("sweep", "axis", "unknown axis '" + axis + "' (batch_size|optimizer|seed|epochs)");
  s.values = c.get_list("sweep", "values");
  if (s.values.empty()) c.error_at("sweep", "values", "empty list");
  if (s.axis == SweepAxis::optimizer) {
    for (const auto& v : s.values) {
      with_line(c, "sweep", "values", [&] { return parse_optimizer_kind(v); });
    }
  } else {
    // numeric axes are checked here so a typo fails before any run starts
    (void)c.get_size_list("sweep", "values");
  }
  s.lr_values = c.get_double_list("sweep", "lr_values");
  if (!s.lr_values.empty() && s.lr_values.size() != s.values.size()) {
    c.error_at("sweep", "lr_values", "must have one entry per value");
  }
  const std::string scaling = c.get_string("sweep", "lr_scaling", "none");
  if (scaling == "sqrt") s.lr_sqrt_scaling = true;
  else if (scaling != "none") c.error_at("sweep", "lr_scaling", "expected none or sqrt");
  if (s.lr_sqrt_scaling) {
    if (s.axis != SweepAxis::batch_size) {
      c.error_at("sweep", "lr_scaling", "sqrt scaling needs axis = batch_size");
    }
    s.lr_base_batch = c.get_size("sweep", "lr_base_batch", 0);
    if (s.lr_base_batch == 0) {
      c.error_at("sweep", "lr_base_batch", "required (nonzero) with lr_scaling = sqrt");
    }
  }
  return s;
}

TrainPlan sweep_point(const TrainPlan& base, const SweepSpec& sweep, std::size_t index) {
  TrainPlan plan = base;
  const std::string& value = sweep.values.at(index);
  std::size_t number = 0;
  if (sweep.axis != SweepAxis::optimizer) parse_number(value, number);
  switch (sweep.axis) {
    case SweepAxis::batch_size:
      plan.batch_size = number;
      if (sweep.lr_sqrt_scaling) {
        plan.schedule.lr = base.schedule.lr *
                           std::sqrt(static_cast<double>(number) /
                                     static_cast<double>(sweep.lr_base_batch));
      }
      break;
    case SweepAxis::optimizer:
      plan.optimizer.kind = parse_optimizer_kind(value);
      break;
    case SweepAxis::seed:
      plan.master_seed = number;
      break;
    case SweepAxis::epochs:
      plan.epochs = number;
      plan.schedule.total_epochs = number;
      break;
  }
  if (!sweep.lr_values.empty()) plan.schedule.lr = sweep.lr_values[index];
  plan.run_id = base.run_id + "_" + to_string(sweep.axis) + "_" + value;
  plan.output_dir = base.output_dir / (to_string(sweep.axis) + "_" + value);
  return plan;
}

WalkCheck walk_from_config(const ConfigFile& c) {
  WalkCheck w;
  w.walk.d = c.get_size("walk", "d", w.walk.d);
  w.walk.T = c.get_size("walk", "T", w.walk.T);
  w.walk.s = c.get_double("walk", "s", w.walk.s);
  w.walk.seed = c.get_u64("walk", "seed", w.walk.seed);
  w.walk.replicates = c.get_size("walk", "replicates", w.walk.replicates);
  w.min_remaining = c.get_size("walk", "min_remaining", w.min_remaining);
  w.cosine_tolerance = c.get_double("walk", "cosine_tolerance", w.cosine_tolerance);
  w.ratio_tolerance = c.get_double("walk", "ratio_tolerance", w.ratio_tolerance);
  return w;
}

ConvergeCheck converge_from_config(const ConfigFile& c) {
  ConvergeCheck k;
  k.spec.mu = c.get_double("converge", "mu", k.spec.mu);
  k.spec.L = c.get_double("converge", "L", k.spec.L);
  k.spec.d = c.get_size("converge", "d", k.spec.d);
  k.spec.T = c.get_size("converge", "T", k.spec.T);
  k.spec.seed = c.get_u64("converge", "seed", k.spec.seed);
  k.tolerance = c.get_double("converge", "tolerance", k.tolerance);
  return k;
}

GradCheckConfig gradcheck_from_config(const ConfigFile& c) {
  GradCheckConfig g;
  if (c.has("gradcheck", "objectives")) g.objectives = c.get_list("gradcheck", "objectives");
  for (const auto& name : g.objectives) {
    if (name != "mlp" && name != "alm" && name != "alm_hinge" && name != "sm" && name != "quad") {
      c.error_at("gradcheck", "objectives", "unknown objective '" + name + "'");
    }
  }
  g.eps = c.get_double("gradcheck", "eps", g.eps);
  g.tolerance = c.get_double("gradcheck", "tolerance", g.tolerance);
  g.seed = c.get_u64("gradcheck", "seed", g.seed);
  return g;
}

CounterexampleExpectation expectation_from_config(const ConfigFile& c) {
  const std::string v = c.get_string("counterexample", "expect", "negative_rsi");
  if (v == "negative_rsi") return CounterexampleExpectation::negative_rsi;
  if (v == "negative_gamma") return CounterexampleExpectation::negative_gamma;
  if (v == "no_negative_rsi") return CounterexampleExpectation::no_negative_rsi;
  c.error_at("counterexample", "expect",
             "expected negative_rsi, negative_gamma or no_negative_rsi");
}

}  // namespace trajgeom::cli
