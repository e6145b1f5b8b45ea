#include "trajgeom/vecmath.hpp"

#include <cmath>
#include <cstring>

#include "trajgeom/errors.hpp"

namespace trajgeom {

ParamVector::ParamVector(std::vector<double> values)
    : values_(std::move(values)) {
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw Error("ParamVector entry " + std::to_string(i) + " is not finite");
    }
  }
}

ParamVector::ParamVector(std::initializer_list<double> values)
    : ParamVector(std::vector<double>(values)) {}

ParamVector ParamVector::zeros(std::size_t dim) {
  return ParamVector(Unchecked{}, std::vector<double>(dim, 0.0));
}

bool ParamVector::all_finite() const {
  for (double v : values_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

bool ParamVector::bitwise_equal(const ParamVector& other) const {
  return values_.size() == other.values_.size() &&
         (values_.empty() ||
          std::memcmp(values_.data(), other.values_.data(),
                      values_.size() * sizeof(double)) == 0);
}

void require_same_dim(const ParamVector& a, const ParamVector& b) {
  if (a.dim() != b.dim()) throw DimensionError(a.dim(), b.dim());
}

double dot(const ParamVector& a, const ParamVector& b) {
  require_same_dim(a, b);
  double sum = 0.0;
  const double* x = a.data();
  const double* y = b.data();
  for (std::size_t i = 0, n = a.dim(); i < n; ++i) sum += x[i] * y[i];
  return sum;
}

double norm2(const ParamVector& a) { return std::sqrt(dot(a, a)); }

ParamVector sub(const ParamVector& a, const ParamVector& b) {
  require_same_dim(a, b);
  std::vector<double> out(a.dim());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] - b[i];
  return ParamVector(ParamVector::Unchecked{}, std::move(out));
}

ParamVector add(const ParamVector& a, const ParamVector& b) {
  require_same_dim(a, b);
  std::vector<double> out(a.dim());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] + b[i];
  return ParamVector(ParamVector::Unchecked{}, std::move(out));
}

ParamVector axpy(double alpha, const ParamVector& x, const ParamVector& y) {
  require_same_dim(x, y);
  std::vector<double> out(x.dim());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = y[i] + alpha * x[i];
  return ParamVector(ParamVector::Unchecked{}, std::move(out));
}

ParamVector scale(double alpha, const ParamVector& x) {
  std::vector<double> out(x.dim());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = alpha * x[i];
  return ParamVector(ParamVector::Unchecked{}, std::move(out));
}

void axpy_inplace(double alpha, const ParamVector& x, ParamVector& y) {
  require_same_dim(x, y);
  double* out = y.data();
  const double* in = x.data();
  for (std::size_t i = 0, n = x.dim(); i < n; ++i) out[i] += alpha * in[i];
}

}  // namespace trajgeom
