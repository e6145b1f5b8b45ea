#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace trajgeom {

// Flat coordinate vector for weights, gradients and directions.
//
// Entries are finite on construction from external values; arithmetic below
// does not re-check, the training loop does (see protocol.hpp).
class ParamVector {
 public:
  ParamVector() = default;
  explicit ParamVector(std::vector<double> values);
  ParamVector(std::initializer_list<double> values);

  static ParamVector zeros(std::size_t dim);

  std::size_t dim() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  std::span<double> mutable_values() { return values_; }
  const double* data() const { return values_.data(); }
  double* data() { return values_.data(); }

  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }

  bool all_finite() const;

  // Bitwise comparison, so +0.0 != -0.0 and NaN payloads matter.
  bool bitwise_equal(const ParamVector& other) const;

  friend bool operator==(const ParamVector&, const ParamVector&) = default;

 private:
  struct Unchecked {};
  ParamVector(Unchecked, std::vector<double> values)
      : values_(std::move(values)) {}

  std::vector<double> values_;

  friend ParamVector sub(const ParamVector&, const ParamVector&);
  friend ParamVector add(const ParamVector&, const ParamVector&);
  friend ParamVector axpy(double, const ParamVector&, const ParamVector&);
  friend ParamVector scale(double, const ParamVector&);
};

// All reductions accumulate strictly left to right in index order. This is
// what makes pass one and pass two of a measurement bitwise identical.
double dot(const ParamVector& a, const ParamVector& b);
double norm2(const ParamVector& a);

ParamVector sub(const ParamVector& a, const ParamVector& b);
ParamVector add(const ParamVector& a, const ParamVector& b);
// y + alpha * x
ParamVector axpy(double alpha, const ParamVector& x, const ParamVector& y);
ParamVector scale(double alpha, const ParamVector& x);

// In-place y += alpha * x.
void axpy_inplace(double alpha, const ParamVector& x, ParamVector& y);

void require_same_dim(const ParamVector& a, const ParamVector& b);

}  // namespace trajgeom
