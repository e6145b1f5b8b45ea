#include "trajgeom/errors.hpp"

namespace trajgeom {

DimensionError::DimensionError(std::size_t expected, std::size_t actual)
    : Error("dimension mismatch: expected " + std::to_string(expected) +
            ", got " + std::to_string(actual)) {}

DivergenceError::DivergenceError(std::size_t step)
    : Error("diverged: non-finite loss or weights at step " +
            std::to_string(step)),
      step_(step) {}

ReplayMismatchError::ReplayMismatchError(std::size_t step)
    : Error("replay mismatch: trajectory hash diverges at step " +
            std::to_string(step)),
      step_(step) {}

}  // namespace trajgeom
