#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "trajgeom/random.hpp"

namespace trajgeom {

// Deterministic minibatch schedule over [0, n).
//
// Epoch e uses a Fisher-Yates permutation drawn from the "shuffle" stream of
// the master seed, derived with index e, so any epoch can be regenerated
// without replaying earlier ones. Batch b of an epoch is the slice
// [b*m, min((b+1)*m, n)) of that permutation; with drop_last the trailing
// partial batch is skipped.
class MinibatchSchedule {
 public:
  MinibatchSchedule(std::uint64_t master_seed, std::size_t n,
                    std::size_t batch_size, std::size_t epochs,
                    bool drop_last = true);

  std::size_t steps_per_epoch() const { return steps_per_epoch_; }
  std::size_t total_steps() const { return steps_per_epoch_ * epochs_; }
  std::size_t batch_size() const { return batch_size_; }
  std::size_t epochs() const { return epochs_; }

  // Index set of step t. The returned span stays valid until the next call
  // that crosses an epoch boundary.
  std::span<const std::size_t> next_batch(std::size_t t);

  std::vector<std::size_t> epoch_permutation(std::size_t epoch) const;

 private:
  RandomStream shuffle_;
  std::size_t n_;
  std::size_t batch_size_;
  std::size_t epochs_;
  bool drop_last_;
  std::size_t steps_per_epoch_;
  std::size_t cached_epoch_ = static_cast<std::size_t>(-1);
  std::vector<std::size_t> permutation_;
};

}  // namespace trajgeom
