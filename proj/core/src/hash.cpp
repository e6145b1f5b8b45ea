#include "trajgeom/hash.hpp"

#include <bit>
#include <cstdio>
#include <cstring>

#include "trajgeom/errors.hpp"

namespace trajgeom {

namespace {

constexpr std::uint64_t kOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kPrime = 0x100000001b3ULL;

inline std::uint64_t absorb_u64(std::uint64_t h, std::uint64_t word) {
  for (int i = 0; i < 8; ++i) {
    h ^= (word >> (8 * i)) & 0xffu;
    h *= kPrime;
  }
  return h;
}

}  // namespace

void HashChain::push(const ParamVector& w) {
  std::uint64_t h = kOffset;
  h = absorb_u64(h, links_.empty() ? 0 : links_.back());
  h = absorb_u64(h, w.dim());
  for (double v : w.values()) h = absorb_u64(h, std::bit_cast<std::uint64_t>(v));
  links_.push_back(h);
}

std::optional<std::size_t> HashChain::first_divergence(
    const HashChain& other) const {
  const std::size_t n = std::min(links_.size(), other.links_.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (links_[i] != other.links_[i]) return i;
  }
  return std::nullopt;
}

std::string HashChain::to_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::uint64_t HashChain::from_hex(const std::string& s) {
  if (s.size() != 16) throw Error("bad hash link '" + s + "'");
  std::uint64_t h = 0;
  for (char c : s) {
    h <<= 4;
    if (c >= '0' && c <= '9') h |= static_cast<std::uint64_t>(c - '0');
    else if (c >= 'a' && c <= 'f') h |= static_cast<std::uint64_t>(c - 'a' + 10);
    else throw Error("bad hash link '" + s + "'");
  }
  return h;
}

HashChain HashChain::from_links(std::vector<std::uint64_t> links) {
  HashChain chain;
  chain.links_ = std::move(links);
  return chain;
}

}  // namespace trajgeom
