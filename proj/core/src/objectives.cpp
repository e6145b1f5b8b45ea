#include "trajgeom/objectives.hpp"

#include <algorithm>
#include <cmath>

#include "trajgeom/errors.hpp"

namespace trajgeom {

// ---------------------------------------------------------------------------
// MLP

std::size_t mlp_param_count(std::span<const std::size_t> layer_sizes) {
  if (layer_sizes.size() < 2) throw Error("mlp: need at least two layer sizes");
  std::size_t count = 0;
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    count += layer_sizes[l] * layer_sizes[l + 1] + layer_sizes[l + 1];
  }
  return count;
}

ParamVector mlp_init(std::span<const std::size_t> layer_sizes,
                     RandomStream& stream) {
  ParamVector w = ParamVector::zeros(mlp_param_count(layer_sizes));
  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    const std::size_t fan_in = layer_sizes[l];
    const std::size_t fan_out = layer_sizes[l + 1];
    const double stddev = std::sqrt(2.0 / static_cast<double>(fan_in));
    for (std::size_t i = 0; i < fan_in * fan_out; ++i) {
      w[offset + i] = stddev * stream.gauss();
    }
    offset += fan_in * fan_out + fan_out;  // biases stay zero
  }
  return w;
}

LossGrad mlp_loss_grad(const ParamVector& w,
                       std::span<const std::size_t> layer_sizes,
                       const Dataset& data, std::span<const std::size_t> batch) {
  const std::size_t expected = mlp_param_count(layer_sizes);
  if (w.dim() != expected) throw DimensionError(expected, w.dim());
  if (layer_sizes.front() != data.p) throw DimensionError(layer_sizes.front(), data.p);
  const std::size_t classes = layer_sizes.back();
  if (batch.empty()) throw Error("mlp: empty batch");

  const std::size_t L = layer_sizes.size() - 1;  // number of affine layers
  std::vector<std::size_t> offsets(L);
  for (std::size_t l = 0, off = 0; l < L; ++l) {
    offsets[l] = off;
    off += layer_sizes[l] * layer_sizes[l + 1] + layer_sizes[l + 1];
  }

  // acts[l] is the input of affine layer l (post-ReLU for l > 0).
  std::vector<std::vector<double>> acts(L + 1);
  for (std::size_t l = 0; l <= L; ++l) acts[l].resize(layer_sizes[l]);
  std::vector<double> delta, next_delta;

  LossGrad out;
  out.grad = ParamVector::zeros(w.dim());
  double* g = out.grad.data();
  const double* wp = w.data();
  double loss_sum = 0.0;

  for (const std::size_t idx : batch) {
    if (idx >= data.n) throw Error("mlp: batch index out of range");
    const auto x = data.row(idx);
    std::copy(x.begin(), x.end(), acts[0].begin());

    for (std::size_t l = 0; l < L; ++l) {
      const std::size_t in = layer_sizes[l];
      const std::size_t outn = layer_sizes[l + 1];
      const double* W = wp + offsets[l];
      const double* b = W + in * outn;
      const bool relu = l + 1 < L;
      for (std::size_t o = 0; o < outn; ++o) {
        double z = b[o];
        const double* row = W + o * in;
        for (std::size_t i = 0; i < in; ++i) z += row[i] * acts[l][i];
        acts[l + 1][o] = relu ? (z > 0.0 ? z : 0.0) : z;
      }
    }

    // Softmax cross-entropy with a max shift.
    const auto& logits = acts[L];
    const double zmax = *std::max_element(logits.begin(), logits.end());
    double denom = 0.0;
    for (double z : logits) denom += std::exp(z - zmax);
    const double log_denom = std::log(denom);
    const std::size_t y = data.label(idx);
    if (y >= classes) throw Error("mlp: label exceeds output width");
    loss_sum += log_denom - (logits[y] - zmax);

    delta.resize(classes);
    for (std::size_t c = 0; c < classes; ++c) {
      delta[c] = std::exp(logits[c] - zmax - log_denom) - (c == y ? 1.0 : 0.0);
    }

    for (std::size_t l = L; l-- > 0;) {
      const std::size_t in = layer_sizes[l];
      const std::size_t outn = layer_sizes[l + 1];
      const double* W = wp + offsets[l];
      double* gW = g + offsets[l];
      double* gb = gW + in * outn;
      const auto& a = acts[l];
      for (std::size_t o = 0; o < outn; ++o) {
        const double d = delta[o];
        double* grow = gW + o * in;
        for (std::size_t i = 0; i < in; ++i) grow[i] += d * a[i];
        gb[o] += d;
      }
      if (l == 0) break;
      next_delta.assign(in, 0.0);
      for (std::size_t o = 0; o < outn; ++o) {
        const double d = delta[o];
        const double* row = W + o * in;
        for (std::size_t i = 0; i < in; ++i) next_delta[i] += row[i] * d;
      }
      // ReLU'(z) = 1 iff the activation is positive.
      for (std::size_t i = 0; i < in; ++i) {
        if (!(a[i] > 0.0)) next_delta[i] = 0.0;
      }
      delta.swap(next_delta);
    }
  }

  const double inv_m = 1.0 / static_cast<double>(batch.size());
  out.loss = loss_sum * inv_m;
  for (std::size_t i = 0, n = out.grad.dim(); i < n; ++i) g[i] *= inv_m;
  return out;
}

MlpObjective::MlpObjective(std::shared_ptr<const Dataset> data,
                           std::vector<std::size_t> hidden)
    : data_(std::move(data)) {
  if (!data_ || !data_->is_classification() || data_->num_classes < 2) {
    throw Error("mlp: needs a classification dataset with >= 2 classes");
  }
  layers_.push_back(data_->p);
  layers_.insert(layers_.end(), hidden.begin(), hidden.end());
  layers_.push_back(data_->num_classes);
  for (std::size_t w : layers_) {
    if (w == 0) throw Error("mlp: zero-width layer");
  }
  dim_ = mlp_param_count(layers_);
}

LossGrad MlpObjective::evaluate(const ParamVector& w,
                                std::span<const std::size_t> batch) const {
  return mlp_loss_grad(w, layers_, *data_, batch);
}

ParamVector MlpObjective::initial_point(RandomStream& init) const {
  return mlp_init(layers_, init);
}

// ---------------------------------------------------------------------------
// ALM

LossGrad alm_loss_grad(const ParamVector& w, const Dataset& data,
                       std::span<const std::size_t> batch, AlmForm form) {
  if (w.dim() != data.p) throw DimensionError(data.p, w.dim());
  if (batch.empty()) throw Error("alm: empty batch");
  LossGrad out;
  out.grad = ParamVector::zeros(w.dim());
  double* g = out.grad.data();
  double sq_sum = 0.0;
  for (const std::size_t idx : batch) {
    if (idx >= data.n) throw Error("alm: batch index out of range");
    const auto x = data.row(idx);
    double pred = 0.0;
    for (std::size_t j = 0; j < data.p; ++j) pred += w[j] * x[j];
    const double r = pred - data.targets[idx];
    if (r > 0.0) {
      sq_sum += r * r;
      for (std::size_t j = 0; j < data.p; ++j) g[j] += r * x[j];
    }
  }
  // g currently holds sum_i r_i^+ x_i.
  const double m = static_cast<double>(batch.size());
  const double mean_sq = sq_sum / m;
  if (form == AlmForm::squared_hinge) {
    out.loss = mean_sq;
    const double c = 2.0 / m;
    for (std::size_t j = 0; j < data.p; ++j) g[j] *= c;
  } else {
    out.loss = std::sqrt(mean_sq);
    const double c = out.loss > 0.0 ? 1.0 / (m * out.loss) : 0.0;
    for (std::size_t j = 0; j < data.p; ++j) g[j] *= c;
  }
  return out;
}

AlmObjective::AlmObjective(std::shared_ptr<const Dataset> data, AlmForm form,
                           double init_scale)
    : data_(std::move(data)), form_(form), init_scale_(init_scale) {
  if (!data_) throw Error("alm: missing dataset");
}

LossGrad AlmObjective::evaluate(const ParamVector& w,
                                std::span<const std::size_t> batch) const {
  return alm_loss_grad(w, *data_, batch, form_);
}

ParamVector AlmObjective::initial_point(RandomStream& init) const {
  ParamVector w = ParamVector::zeros(dim());
  for (std::size_t i = 0; i < w.dim(); ++i) w[i] = init_scale_ * init.gauss();
  return w;
}

// ---------------------------------------------------------------------------
// SM

namespace {
constexpr double kSmAmplitude = 100.0;
}

LossGrad sm_loss_grad(const ParamVector& w, std::span<const double> coeffs) {
  if (w.dim() != coeffs.size()) throw DimensionError(coeffs.size(), w.dim());
  LossGrad out;
  out.grad = ParamVector::zeros(w.dim());
  double sq = 0.0;
  double sines = 0.0;
  for (std::size_t i = 0; i < w.dim(); ++i) {
    const double a = coeffs[i];
    const double s = std::sin(a * w[i]);
    sq += w[i] * w[i];
    sines += s * s;
    out.grad[i] = 2.0 * w[i] + kSmAmplitude * a * std::sin(2.0 * a * w[i]);
  }
  out.loss = sq + kSmAmplitude * sines;
  return out;
}

SmObjective::SmObjective(std::vector<double> coeffs, double init_scale)
    : coeffs_(std::move(coeffs)), init_scale_(init_scale) {
  if (coeffs_.empty()) throw Error("sm: need at least one coefficient");
}

SmObjective SmObjective::random(RandomStream& data, std::size_t dim,
                                double init_scale) {
  std::vector<double> a(dim);
  for (double& v : a) v = data.gauss();
  return SmObjective(std::move(a), init_scale);
}

LossGrad SmObjective::evaluate(const ParamVector& w,
                               std::span<const std::size_t>) const {
  return sm_loss_grad(w, coeffs_);
}

ParamVector SmObjective::initial_point(RandomStream& init) const {
  ParamVector w = ParamVector::zeros(dim());
  for (std::size_t i = 0; i < w.dim(); ++i) w[i] = init_scale_ * init.gauss();
  return w;
}

// ---------------------------------------------------------------------------
// Quadratic

LossGrad quad_loss_grad(const ParamVector& w, std::span<const double> spectrum,
                        const ParamVector& minimizer) {
  if (w.dim() != spectrum.size()) throw DimensionError(spectrum.size(), w.dim());
  require_same_dim(w, minimizer);
  LossGrad out;
  out.grad = ParamVector::zeros(w.dim());
  double loss = 0.0;
  for (std::size_t i = 0; i < w.dim(); ++i) {
    const double e = w[i] - minimizer[i];
    out.grad[i] = spectrum[i] * e;
    loss += spectrum[i] * e * e;
  }
  out.loss = 0.5 * loss;
  return out;
}

std::vector<double> spanning_spectrum(RandomStream& stream, std::size_t d,
                                      double mu, double L) {
  if (!(mu > 0.0) || !(L > 0.0)) throw Error("spectrum: mu and L must be positive");
  if (mu > L) throw Error("spectrum: mu must not exceed L");
  if (d == 0) throw Error("spectrum: dimension must be positive");
  if (d == 1 && mu != L) throw Error("spectrum: d = 1 cannot span mu < L");
  std::vector<double> lambda(d);
  const double lo = std::log(mu);
  const double hi = std::log(L);
  for (std::size_t i = 0; i < d; ++i) {
    if (i == 0) lambda[i] = mu;
    else if (i + 1 == d) lambda[i] = L;
    else lambda[i] = std::clamp(std::exp(lo + stream.uniform() * (hi - lo)), mu, L);
  }
  return lambda;
}

QuadObjective::QuadObjective(std::vector<double> spectrum, ParamVector minimizer,
                             double init_scale)
    : spectrum_(std::move(spectrum)),
      minimizer_(std::move(minimizer)),
      init_scale_(init_scale) {
  if (spectrum_.size() != minimizer_.dim()) {
    throw DimensionError(spectrum_.size(), minimizer_.dim());
  }
  for (double l : spectrum_) {
    if (!(l > 0.0) || !std::isfinite(l)) throw Error("quad: spectrum must be positive");
  }
}

LossGrad QuadObjective::evaluate(const ParamVector& w,
                                 std::span<const std::size_t>) const {
  return quad_loss_grad(w, spectrum_, minimizer_);
}

ParamVector QuadObjective::initial_point(RandomStream& init) const {
  ParamVector w = ParamVector::zeros(dim());
  for (std::size_t i = 0; i < w.dim(); ++i) {
    w[i] = minimizer_[i] + init_scale_ * init.gauss();
  }
  return w;
}

// ---------------------------------------------------------------------------

GradCheckResult grad_check(const Objective& objective, const ParamVector& w,
                           std::span<const std::size_t> batch, double eps,
                           double floor) {
  if (!(eps > 0.0)) throw Error("grad_check: eps must be positive");
  const ParamVector analytic = objective.evaluate(w, batch).grad;
  GradCheckResult result;
  ParamVector probe = w;
  for (std::size_t i = 0; i < w.dim(); ++i) {
    probe[i] = w[i] + eps;
    const double fp = objective.evaluate(probe, batch).loss;
    probe[i] = w[i] - eps;
    const double fm = objective.evaluate(probe, batch).loss;
    probe[i] = w[i];
    const double numeric = (fp - fm) / (2.0 * eps);
    const double a = analytic[i];
    const double denom = std::max({std::abs(a), std::abs(numeric), floor});
    const double err = std::abs(a - numeric) / denom;
    if (i == 0 || err > result.max_rel_error) {
      result.max_rel_error = err;
      result.worst_index = i;
      result.analytic = a;
      result.numeric = numeric;
    }
  }
  return result;
}

}  // namespace trajgeom
