#include "trajgeom/optim.hpp"

#include <cmath>
#include <numbers>

#include "trajgeom/errors.hpp"

namespace trajgeom {

std::string_view to_string(OptimizerKind kind) {
  switch (kind) {
    case OptimizerKind::sgd: return "sgd";
    case OptimizerKind::momentum: return "momentum";
    case OptimizerKind::adam: return "adam";
  }
  return "?";
}

OptimizerKind parse_optimizer_kind(std::string_view text) {
  if (text == "sgd") return OptimizerKind::sgd;
  if (text == "momentum") return OptimizerKind::momentum;
  if (text == "adam") return OptimizerKind::adam;
  throw Error("unknown optimizer '" + std::string(text) + "' (sgd|momentum|adam)");
}

ParamVector sgd_step(const ParamVector& w, const ParamVector& g, double eta) {
  if (!(eta >= 0.0)) throw Error("sgd_step: negative step size");
  return axpy(-eta, g, w);
}

OptimizerState::OptimizerState(OptimizerConfig config, std::size_t dim)
    : config_(config) {
  if (config_.kind != OptimizerKind::sgd) first_ = ParamVector::zeros(dim);
  if (config_.kind == OptimizerKind::adam) second_ = ParamVector::zeros(dim);
}

void OptimizerState::step(ParamVector& w, const ParamVector& g, double eta) {
  require_same_dim(w, g);
  if (!(eta >= 0.0)) throw Error("optimizer step: negative step size");
  ++t_;
  double* x = w.data();
  const double* grad = g.data();
  const std::size_t n = w.dim();

  switch (config_.kind) {
    case OptimizerKind::sgd:
      for (std::size_t i = 0; i < n; ++i) x[i] = x[i] + (-eta) * grad[i];
      break;

    case OptimizerKind::momentum: {
      require_same_dim(w, first_);
      double* v = first_.data();
      const double beta = config_.momentum;
      for (std::size_t i = 0; i < n; ++i) {
        v[i] = beta * v[i] + grad[i];
        x[i] = x[i] + (-eta) * v[i];
      }
      break;
    }

    case OptimizerKind::adam: {
      require_same_dim(w, first_);
      double* m = first_.data();
      double* v = second_.data();
      const double b1 = config_.beta1;
      const double b2 = config_.beta2;
      const double t = static_cast<double>(t_);
      const double c1 = 1.0 - std::pow(b1, t);
      const double c2 = 1.0 - std::pow(b2, t);
      for (std::size_t i = 0; i < n; ++i) {
        m[i] = b1 * m[i] + (1.0 - b1) * grad[i];
        v[i] = b2 * v[i] + (1.0 - b2) * grad[i] * grad[i];
        const double m_hat = m[i] / c1;
        const double v_hat = v[i] / c2;
        x[i] = x[i] - eta * m_hat / (std::sqrt(v_hat) + config_.epsilon);
      }
      break;
    }
  }
}

ParamVector momentum_step(OptimizerState& state, const ParamVector& w,
                          const ParamVector& g, double eta) {
  if (state.config().kind != OptimizerKind::momentum) {
    throw Error("momentum_step: state is not a momentum optimizer");
  }
  ParamVector out = w;
  state.step(out, g, eta);
  return out;
}

ParamVector adam_step(OptimizerState& state, const ParamVector& w,
                      const ParamVector& g, double eta) {
  if (state.config().kind != OptimizerKind::adam) {
    throw Error("adam_step: state is not an adam optimizer");
  }
  ParamVector out = w;
  state.step(out, g, eta);
  return out;
}

// ---------------------------------------------------------------------------

std::string_view to_string(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::constant: return "constant";
    case ScheduleKind::warmup_cosine: return "warmup_cosine";
    case ScheduleKind::linear_decay: return "linear_decay";
  }
  return "?";
}

ScheduleKind parse_schedule_kind(std::string_view text) {
  if (text == "constant") return ScheduleKind::constant;
  if (text == "warmup_cosine") return ScheduleKind::warmup_cosine;
  if (text == "linear_decay") return ScheduleKind::linear_decay;
  throw Error("unknown schedule '" + std::string(text) +
              "' (constant|warmup_cosine|linear_decay)");
}

void Schedule::validate() const {
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw Error("schedule: lr must be finite and >= 0");
  if (total_epochs == 0) throw Error("schedule: total epochs must be positive");
  if (kind == ScheduleKind::warmup_cosine) {
    if (warmup_epochs == 0) throw Error("schedule: warmup_cosine needs warmup_epochs >= 1");
    if (warmup_epochs >= total_epochs) {
      throw Error("schedule: warmup epochs must be fewer than total epochs");
    }
  }
}

double schedule_lr(const Schedule& schedule, std::size_t epoch) {
  if (epoch >= schedule.total_epochs) {
    throw Error("schedule: epoch " + std::to_string(epoch) + " out of range [0, " +
                std::to_string(schedule.total_epochs) + ")");
  }
  const double e = static_cast<double>(epoch);
  switch (schedule.kind) {
    case ScheduleKind::constant:
      return schedule.lr;
    case ScheduleKind::warmup_cosine: {
      const double warm = static_cast<double>(schedule.warmup_epochs);
      if (epoch < schedule.warmup_epochs) return schedule.lr * (e + 1.0) / warm;
      const double span = static_cast<double>(schedule.total_epochs) - warm;
      return schedule.lr * 0.5 * (1.0 + std::cos(std::numbers::pi * (e - warm) / span));
    }
    case ScheduleKind::linear_decay:
      return schedule.lr * (1.0 - e / static_cast<double>(schedule.total_epochs));
  }
  return schedule.lr;
}

}  // namespace trajgeom
