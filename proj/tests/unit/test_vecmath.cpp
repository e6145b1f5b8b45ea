#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "oracles.hpp"
#include "trajgeom/errors.hpp"
#include "trajgeom/random.hpp"
#include "trajgeom/vecmath.hpp"

using namespace trajgeom;

namespace {

ParamVector random_vector(RandomStream& s, std::size_t d) {
  std::vector<double> v(d);
  for (auto& x : v) x = s.gauss();
  return ParamVector(std::move(v));
}

std::vector<double> as_vec(const ParamVector& p) {
  return {p.values().begin(), p.values().end()};
}

}  // namespace

TEST(Vecmath, DotHandArithmetic) {
  EXPECT_EQ(dot(ParamVector{1, 2}, ParamVector{3, 4}), 11.0);
}

TEST(Vecmath, DotWithZeroVector) {
  RandomStream s(3, "test");
  const auto x = random_vector(s, 17);
  EXPECT_EQ(dot(x, ParamVector::zeros(17)), 0.0);
}

TEST(Vecmath, DotSelfIsSquaredNorm) {
  RandomStream s(4, "test");
  for (int k = 0; k < 20; ++k) {
    const auto x = random_vector(s, 33);
    const double d = dot(x, x);
    EXPECT_GE(d, 0.0);
    EXPECT_NEAR(d, oracle::dot(as_vec(x), as_vec(x)), 1e-13 * d);
    EXPECT_EQ(norm2(x), std::sqrt(d));
  }
}

TEST(Vecmath, DotIsStrictlyLeftToRight) {
  // 1e16 + 1 - 1e16 is 0 left to right but 1 with pairwise summation.
  const ParamVector a{1e16, 1.0, -1e16, 1.0};
  const ParamVector ones{1, 1, 1, 1};
  EXPECT_EQ(dot(a, ones), ((1e16 + 1.0) + -1e16) + 1.0);
}

TEST(Vecmath, DimensionMismatchThrows) {
  const ParamVector a{1, 2}, b{1, 2, 3};
  EXPECT_THROW(dot(a, b), DimensionError);
  EXPECT_THROW(sub(a, b), DimensionError);
  EXPECT_THROW(add(a, b), DimensionError);
  EXPECT_THROW(axpy(1.0, a, b), DimensionError);
  ParamVector c = b;
  EXPECT_THROW(axpy_inplace(1.0, a, c), DimensionError);
}

TEST(Vecmath, Norm2HandArithmetic) { EXPECT_EQ(norm2(ParamVector{3, 4}), 5.0); }

TEST(Vecmath, SubSelfIsZero) {
  RandomStream s(5, "test");
  const auto x = random_vector(s, 9);
  EXPECT_TRUE(sub(x, x).bitwise_equal(ParamVector::zeros(9)));
}

TEST(Vecmath, AxpyZeroAlphaIsY) {
  RandomStream s(6, "test");
  const auto x = random_vector(s, 9);
  const auto y = random_vector(s, 9);
  EXPECT_TRUE(axpy(0.0, x, y).bitwise_equal(y));
}

TEST(Vecmath, AxpyElementwise) {
  const auto r = axpy(2.0, ParamVector{1, -1}, ParamVector{10, 20});
  EXPECT_EQ(r, (ParamVector{12, 18}));
  EXPECT_EQ(scale(-0.5, ParamVector{4, 2}), (ParamVector{-2, -1}));
  EXPECT_EQ(add(ParamVector{1, 2}, ParamVector{3, 4}), (ParamVector{4, 6}));
}

TEST(Vecmath, AxpyMinusOneSelfIsExactlyZero) {
  RandomStream s(7, "test");
  for (int k = 0; k < 50; ++k) {
    const auto x = random_vector(s, 64);
    const auto r = axpy(-1.0, x, x);
    for (double v : r.values()) EXPECT_EQ(v, 0.0);
  }
}

TEST(Vecmath, RejectsNonFinite) {
  EXPECT_THROW(ParamVector({1.0, std::numeric_limits<double>::infinity()}), Error);
  EXPECT_THROW(ParamVector({std::nan("")}), Error);
}

TEST(Vecmath, RepeatedReductionsBitwiseIdentical) {
  RandomStream s(8, "test");
  const auto x = random_vector(s, 1000);
  const auto y = random_vector(s, 1000);
  const double d0 = dot(x, y);
  const double n0 = norm2(x);
  for (int k = 0; k < 10; ++k) {
    EXPECT_EQ(std::bit_cast<std::uint64_t>(dot(x, y)), std::bit_cast<std::uint64_t>(d0));
    EXPECT_EQ(std::bit_cast<std::uint64_t>(norm2(x)), std::bit_cast<std::uint64_t>(n0));
  }
}

TEST(Vecmath, BitwiseEqualDistinguishesSignedZero) {
  EXPECT_FALSE(ParamVector{0.0}.bitwise_equal(ParamVector{-0.0}));
  EXPECT_TRUE(ParamVector{1.5}.bitwise_equal(ParamVector{1.5}));
}
