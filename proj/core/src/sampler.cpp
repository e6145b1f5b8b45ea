#include "trajgeom/sampler.hpp"

#include <numeric>
#include <utility>

#include "trajgeom/errors.hpp"

namespace trajgeom {

MinibatchSchedule::MinibatchSchedule(std::uint64_t master_seed, std::size_t n,
                                     std::size_t batch_size, std::size_t epochs,
                                     bool drop_last)
    : shuffle_(master_seed, "shuffle"),
      n_(n),
      batch_size_(batch_size),
      epochs_(epochs),
      drop_last_(drop_last) {
  if (n == 0) throw Error("minibatch schedule: empty dataset");
  if (batch_size == 0) throw Error("minibatch schedule: batch size must be positive");
  if (batch_size > n) {
    throw Error("minibatch schedule: batch size " + std::to_string(batch_size) +
                " exceeds dataset size " + std::to_string(n));
  }
  steps_per_epoch_ = drop_last ? n / batch_size : (n + batch_size - 1) / batch_size;
}

std::vector<std::size_t> MinibatchSchedule::epoch_permutation(std::size_t epoch) const {
  std::vector<std::size_t> perm(n_);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  RandomStream s = shuffle_.derive(epoch);
  for (std::size_t i = n_; i > 1; --i) {
    const std::size_t j = s.below(i);
    std::swap(perm[i - 1], perm[j]);
  }
  return perm;
}

std::span<const std::size_t> MinibatchSchedule::next_batch(std::size_t t) {
  if (t >= total_steps()) {
    throw Error("minibatch schedule: step " + std::to_string(t) +
                " out of range (total " + std::to_string(total_steps()) + ")");
  }
  const std::size_t epoch = t / steps_per_epoch_;
  const std::size_t b = t % steps_per_epoch_;
  if (epoch != cached_epoch_) {
    permutation_ = epoch_permutation(epoch);
    cached_epoch_ = epoch;
  }
  const std::size_t begin = b * batch_size_;
  const std::size_t end = std::min(begin + batch_size_, n_);
  return {permutation_.data() + begin, end - begin};
}

}  // namespace trajgeom
