#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "trajgeom/vecmath.hpp"

namespace trajgeom {

// Order-sensitive rolling hash over iterates.
//
// link[t] = H(le64(link[t-1]) || le64(dim) || le64(w_t[0]) || ...), with
// link[-1] = 0, H = FNV-1a 64 and doubles taken as their IEEE-754 bit patterns.
class HashChain {
 public:
  void push(const ParamVector& w);

  std::size_t size() const { return links_.size(); }
  const std::vector<std::uint64_t>& links() const { return links_; }
  std::uint64_t back() const { return links_.back(); }

  // Index of the first differing link, or nullopt if one chain is a prefix of
  // the other and they agree on the common part.
  std::optional<std::size_t> first_divergence(const HashChain& other) const;

  static std::string to_hex(std::uint64_t h);
  static std::uint64_t from_hex(const std::string& s);

  static HashChain from_links(std::vector<std::uint64_t> links);

 private:
  std::vector<std::uint64_t> links_;
};

}  // namespace trajgeom
