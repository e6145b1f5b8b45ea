#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "trajgeom/objectives.hpp"
#include "trajgeom/optim.hpp"

namespace trajgeom {

enum class ObjectiveKind { mlp, alm, sm, quad };
enum class DataKind { none, blobs, regression, idx, csv };

std::string_view to_string(ObjectiveKind kind);
ObjectiveKind parse_objective_kind(std::string_view text);
std::string_view to_string(DataKind kind);
DataKind parse_data_kind(std::string_view text);
std::string_view to_string(AlmForm form);
AlmForm parse_alm_form(std::string_view text);

struct DataSpec {
  DataKind kind = DataKind::none;
  std::size_t n = 0;
  std::size_t p = 0;
  std::size_t classes = 0;
  double spread = 1.0;
  std::filesystem::path path;
  std::filesystem::path labels_path;  // idx only, optional
  std::string label_column = "label";  // csv only
  double feature_scale = 1.0;
};

struct ObjectiveSpec {
  ObjectiveKind kind = ObjectiveKind::quad;
  std::vector<std::size_t> hidden;  // mlp
  AlmForm alm_form = AlmForm::rmse;  // alm
  std::size_t dim = 0;               // sm, quad
  double mu = 1.0;                   // quad spectrum lower end
  double L = 1.0;                    // quad spectrum upper end
  double init_scale = 1.0;           // alm, sm, quad: w0 ~ init_scale * N(0, I)
  DataSpec data;
};

// Everything needed to reproduce a run. Two executions of the same plan give
// bitwise-identical trajectories.
struct TrainPlan {
  std::string run_id = "run";
  ObjectiveSpec objective;
  OptimizerConfig optimizer;
  Schedule schedule;  // total_epochs is kept equal to `epochs`
  std::size_t batch_size = 1;
  std::size_t epochs = 1;
  std::size_t steps_per_epoch = 1;  // full-batch objectives only
  bool drop_last = true;
  std::uint64_t master_seed = 0;
  double weight_decay = 0.0;
  bool exclude_final_epoch = true;
  // Negative control for replay checks: mixes wall-clock entropy into the
  // init stream so two passes start from different points.
  bool inject_time_seed = false;
  std::filesystem::path output_dir;

  // Throws Error describing the first invalid field.
  void validate() const;

  std::string to_json() const;
  static TrainPlan from_json(std::string_view text);
};

// Builds the oracle a plan trains on. All randomness comes from the "data"
// stream of `master_seed`.
std::shared_ptr<const Objective> make_objective(const ObjectiveSpec& spec,
                                                std::uint64_t master_seed);

}  // namespace trajgeom
