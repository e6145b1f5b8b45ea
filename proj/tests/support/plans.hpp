#pragma once

#include "trajgeom/plan.hpp"

namespace testplans {

inline trajgeom::TrainPlan quadratic(double mu, double L, std::size_t d, std::size_t steps,
                                     double lr, std::uint64_t seed = 1) {
  trajgeom::TrainPlan p;
  p.run_id = "quad";
  p.objective.kind = trajgeom::ObjectiveKind::quad;
  p.objective.dim = d;
  p.objective.mu = mu;
  p.objective.L = L;
  p.schedule.lr = lr;
  p.epochs = steps;
  p.schedule.total_epochs = steps;
  p.steps_per_epoch = 1;
  p.master_seed = seed;
  return p;
}

inline trajgeom::TrainPlan small_mlp(trajgeom::OptimizerKind kind, double lr,
                                     std::uint64_t seed = 3) {
  trajgeom::TrainPlan p;
  p.run_id = "mlp_small";
  p.objective.kind = trajgeom::ObjectiveKind::mlp;
  p.objective.hidden = {8};
  p.objective.data.kind = trajgeom::DataKind::blobs;
  p.objective.data.n = 60;
  p.objective.data.p = 5;
  p.objective.data.classes = 3;
  p.objective.data.spread = 1.0;
  p.optimizer.kind = kind;
  p.schedule.lr = lr;
  p.batch_size = 8;
  p.epochs = 4;
  p.schedule.total_epochs = 4;
  p.master_seed = seed;
  return p;
}

}  // namespace testplans
