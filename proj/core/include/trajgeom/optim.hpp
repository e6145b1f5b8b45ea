#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

#include "trajgeom/vecmath.hpp"

namespace trajgeom {

enum class OptimizerKind { sgd, momentum, adam };

std::string_view to_string(OptimizerKind kind);
OptimizerKind parse_optimizer_kind(std::string_view text);

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::sgd;
  double momentum = 0.9;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// w - eta * g
ParamVector sgd_step(const ParamVector& w, const ParamVector& g, double eta);

// Per-run optimizer state. Momentum is heavy-ball without dampening:
//   v <- beta v + g,  w <- w - eta v
// Adam is the bias-corrected form:
//   m <- b1 m + (1 - b1) g,  v <- b2 v + (1 - b2) g^2,
//   w <- w - eta * m_hat / (sqrt(v_hat) + eps)
class OptimizerState {
 public:
  OptimizerState(OptimizerConfig config, std::size_t dim);

  // Updates w in place.
  void step(ParamVector& w, const ParamVector& g, double eta);

  const OptimizerConfig& config() const { return config_; }
  std::uint64_t steps_taken() const { return t_; }
  const ParamVector& velocity() const { return first_; }
  const ParamVector& first_moment() const { return first_; }
  const ParamVector& second_moment() const { return second_; }

 private:
  OptimizerConfig config_;
  std::uint64_t t_ = 0;
  ParamVector first_;   // velocity (momentum) or m (adam)
  ParamVector second_;  // v (adam)
};

// Returning spellings of the stateful steps.
ParamVector momentum_step(OptimizerState& state, const ParamVector& w,
                          const ParamVector& g, double eta);
ParamVector adam_step(OptimizerState& state, const ParamVector& w,
                      const ParamVector& g, double eta);

enum class ScheduleKind { constant, warmup_cosine, linear_decay };

std::string_view to_string(ScheduleKind kind);
ScheduleKind parse_schedule_kind(std::string_view text);

// Per-epoch learning rate.
//   constant:       lr
//   warmup_cosine:  lr * (e + 1) / warmup               for e < warmup
//                   lr * (1 + cos(pi (e - warmup) / (total - warmup))) / 2
//   linear_decay:   lr * (1 - e / total)
// where lr is the base (or peak) rate.
struct Schedule {
  ScheduleKind kind = ScheduleKind::constant;
  double lr = 0.01;
  std::size_t warmup_epochs = 0;
  std::size_t total_epochs = 1;

  void validate() const;
};

double schedule_lr(const Schedule& schedule, std::size_t epoch);

}  // namespace trajgeom
