#pragma once

#include <cstdint>
#include <string_view>

namespace trajgeom {

// Named, seeded random stream.
//
// Generator: SplitMix64. The initial state is
//   mix64(master_seed ^ mix64(fnv1a64(label)))
// where mix64 is the SplitMix64 finalizer and fnv1a64 the 64-bit FNV-1a hash
// of the label bytes. Uniforms take the top 53 bits of each output word.
// Gaussians use Box-Muller on a pair (u1, u2) of consecutive uniforms:
//   r = sqrt(-2 ln(1 - u1)),  z0 = r cos(2 pi u2),  z1 = r sin(2 pi u2)
// z0 is returned first and z1 is cached for the next call.
//
// A stream must not be shared between threads.
class RandomStream {
 public:
  RandomStream(std::uint64_t master_seed, std::string_view label);

  std::uint64_t next_u64();
  // Uniform in [0, 1).
  double uniform();
  double gauss();
  // Unbiased uniform integer in [0, bound), bound > 0 (rejection sampling).
  std::uint64_t below(std::uint64_t bound);

  // Independent child stream keyed by `index`. Does not advance this stream.
  RandomStream derive(std::uint64_t index) const;

  std::uint64_t key() const { return key_; }

 private:
  struct FromKey {};
  RandomStream(FromKey, std::uint64_t key);

  std::uint64_t key_;
  std::uint64_t state_;
  double cached_gauss_ = 0.0;
  bool has_cached_ = false;
};

std::uint64_t mix64(std::uint64_t z);
std::uint64_t fnv1a64(std::string_view bytes);

// Free-function spellings.
inline RandomStream stream_new(std::uint64_t master_seed, std::string_view label) {
  return RandomStream(master_seed, label);
}
inline double stream_uniform(RandomStream& s) { return s.uniform(); }
inline double stream_gauss(RandomStream& s) { return s.gauss(); }

}  // namespace trajgeom
