#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "trajgeom/dataset.hpp"
#include "trajgeom/random.hpp"
#include "trajgeom/vecmath.hpp"

namespace trajgeom {

struct LossGrad {
  double loss = 0.0;
  ParamVector grad;
};

// Deterministic gradient oracle: same (w, batch) gives bitwise the same
// (loss, grad). Implementations are immutable after construction and safe to
// evaluate concurrently.
class Objective {
 public:
  virtual ~Objective() = default;

  virtual std::string name() const = 0;
  virtual std::size_t dim() const = 0;
  // Number of samples minibatches draw from; 0 for full-batch objectives,
  // which ignore the batch argument.
  virtual std::size_t sample_count() const = 0;
  virtual LossGrad evaluate(const ParamVector& w,
                            std::span<const std::size_t> batch) const = 0;
  virtual ParamVector initial_point(RandomStream& init) const = 0;
};

// ---------------------------------------------------------------------------
// ReLU MLP with softmax cross-entropy.
//
// Parameter layout, layer by layer: the weight matrix W_l (out x in,
// row-major) followed by the bias b_l (out). ReLU on every hidden layer,
// identity on the output layer; the ReLU derivative at 0 is taken as 0.

std::size_t mlp_param_count(std::span<const std::size_t> layer_sizes);

// He-normal weights (stddev sqrt(2 / fan_in)), zero biases.
ParamVector mlp_init(std::span<const std::size_t> layer_sizes,
                     RandomStream& stream);

// Mean cross-entropy over `batch` and its gradient.
LossGrad mlp_loss_grad(const ParamVector& w,
                       std::span<const std::size_t> layer_sizes,
                       const Dataset& data, std::span<const std::size_t> batch);

class MlpObjective final : public Objective {
 public:
  // `hidden` are the hidden widths; input and output widths come from data.
  MlpObjective(std::shared_ptr<const Dataset> data,
               std::vector<std::size_t> hidden);

  std::string name() const override { return "mlp"; }
  std::size_t dim() const override { return dim_; }
  std::size_t sample_count() const override { return data_->n; }
  LossGrad evaluate(const ParamVector& w,
                    std::span<const std::size_t> batch) const override;
  ParamVector initial_point(RandomStream& init) const override;

  const std::vector<std::size_t>& layer_sizes() const { return layers_; }

 private:
  std::shared_ptr<const Dataset> data_;
  std::vector<std::size_t> layers_;
  std::size_t dim_;
};

// ---------------------------------------------------------------------------
// Asymmetric linear model: penalizes predictions above their targets.
//
//   squared_hinge: mean_i max(0, w.x_i - y_i)^2           (convex)
//   rmse:          sqrt(mean_i max(0, w.x_i - y_i)^2)     (used for runs)
//
// The hinge derivative at 0 is 0, and the RMSE gradient is 0 when the loss is 0.

enum class AlmForm { rmse, squared_hinge };

LossGrad alm_loss_grad(const ParamVector& w, const Dataset& data,
                       std::span<const std::size_t> batch, AlmForm form);

class AlmObjective final : public Objective {
 public:
  AlmObjective(std::shared_ptr<const Dataset> data, AlmForm form,
               double init_scale = 1.0);

  std::string name() const override {
    return form_ == AlmForm::rmse ? "alm" : "alm_hinge";
  }
  std::size_t dim() const override { return data_->p; }
  std::size_t sample_count() const override { return data_->n; }
  LossGrad evaluate(const ParamVector& w,
                    std::span<const std::size_t> batch) const override;
  ParamVector initial_point(RandomStream& init) const override;

  AlmForm form() const { return form_; }

 private:
  std::shared_ptr<const Dataset> data_;
  AlmForm form_;
  double init_scale_;
};

// ---------------------------------------------------------------------------
// Sinusoidal mixture: ||w||^2 + 100 * sum_i sin(a_i w_i)^2, one a_i per
// coordinate. Full-batch.

LossGrad sm_loss_grad(const ParamVector& w, std::span<const double> coeffs);

class SmObjective final : public Objective {
 public:
  SmObjective(std::vector<double> coeffs, double init_scale = 1.0);
  // a_i ~ N(0, 1) from `data`.
  static SmObjective random(RandomStream& data, std::size_t dim,
                            double init_scale = 1.0);

  std::string name() const override { return "sm"; }
  std::size_t dim() const override { return coeffs_.size(); }
  std::size_t sample_count() const override { return 0; }
  LossGrad evaluate(const ParamVector& w,
                    std::span<const std::size_t> batch) const override;
  ParamVector initial_point(RandomStream& init) const override;

  const std::vector<double>& coeffs() const { return coeffs_; }

 private:
  std::vector<double> coeffs_;
  double init_scale_;
};

// ---------------------------------------------------------------------------
// Diagonal quadratic 0.5 * sum_i lambda_i (w_i - c_i)^2 with known minimizer c.
// Full-batch.

LossGrad quad_loss_grad(const ParamVector& w, std::span<const double> spectrum,
                        const ParamVector& minimizer);

// d eigenvalues in [mu, L]: the first is mu, the last is L (when d >= 2) and
// the interior is log-uniform drawn from `stream`.
std::vector<double> spanning_spectrum(RandomStream& stream, std::size_t d,
                                      double mu, double L);

class QuadObjective final : public Objective {
 public:
  QuadObjective(std::vector<double> spectrum, ParamVector minimizer,
                double init_scale = 1.0);

  std::string name() const override { return "quad"; }
  std::size_t dim() const override { return spectrum_.size(); }
  std::size_t sample_count() const override { return 0; }
  LossGrad evaluate(const ParamVector& w,
                    std::span<const std::size_t> batch) const override;
  ParamVector initial_point(RandomStream& init) const override;

  const std::vector<double>& spectrum() const { return spectrum_; }
  const ParamVector& minimizer() const { return minimizer_; }

 private:
  std::vector<double> spectrum_;
  ParamVector minimizer_;
  double init_scale_;
};

// ---------------------------------------------------------------------------

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
};

// Central differences (f(w + eps e_i) - f(w - eps e_i)) / (2 eps) on every
// coordinate. The per-coordinate error is
//   |analytic - numeric| / max(|analytic|, |numeric|, floor)
// where the floor keeps near-zero partials from turning roundoff into a
// spurious relative error.
GradCheckResult grad_check(const Objective& objective, const ParamVector& w,
                           std::span<const std::size_t> batch, double eps,
                           double floor = 1e-3);

}  // namespace trajgeom
