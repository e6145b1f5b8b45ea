#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace trajgeom {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  DimensionError(std::size_t expected, std::size_t actual);
};

// Malformed input file. `position` is a byte offset (binary formats) or a
// 1-based line number (text formats); `what()` says which.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t position)
      : Error(message), position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

// Non-finite loss or weights during training.
class DivergenceError : public Error {
 public:
  explicit DivergenceError(std::size_t step);
  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

// Pass two did not reproduce pass one.
class ReplayMismatchError : public Error {
 public:
  explicit ReplayMismatchError(std::size_t step);
  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

}  // namespace trajgeom
