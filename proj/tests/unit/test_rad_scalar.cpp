// Copyright 2026 The mdlab Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <utility>

#include "generators.hpp"
#include "mdlab/errors.hpp"
#include "mdlab/rad_scalar.hpp"

namespace mdlab {
namespace {

class PolicyGuard {
 public:
  explicit PolicyGuard(const PrecisionPolicy& p) : saved_(precision_policy()) { set_precision_policy(p); }
  ~PolicyGuard() { set_precision_policy(saved_); }

 private:
  PrecisionPolicy saved_;
};

// Solutions of q^2 - 2 p^2 = (-1)^k; q - p sqrt(2) is tiny with alternating sign.
std::pair<Integer, Integer> pell(int k) {
  Integer q = 1;
  Integer p = 1;
  for (int i = 1; i < k; ++i) {
    Integer nq = q + 2 * p;
    Integer np = q + p;
    q = nq;
    p = np;
  }
  return {q, p};
}

RadScalar pell_gap(int k) {
  const auto [q, p] = pell(k);
  return RadScalar(Rational(q)) - RadScalar::scaled_sqrt(Rational(p), Rational(2));
}

int pell_sign(int k) { return k % 2 == 0 ? 1 : -1; }

TEST(RadScalar, CanonicalForm) {
  const RadScalar a = RadScalar::sqrt_of(Rational(8));
  EXPECT_EQ(a, RadScalar::scaled_sqrt(Rational(2), Rational(2)));
  EXPECT_EQ(RadScalar::sqrt_of(Rational(9, 4)), RadScalar(Rational(3, 2)));
  EXPECT_EQ(RadScalar::sqrt_of(Rational(1, 2)), RadScalar::scaled_sqrt(Rational(1, 2), Rational(2)));
  EXPECT_TRUE((a - a).is_zero());
  EXPECT_TRUE(RadScalar::sqrt_of(Rational(2)).square().is_rational());
  EXPECT_EQ(RadScalar::sqrt_of(Rational(6)), RadScalar::sqrt_of(Rational(2)) * RadScalar::sqrt_of(Rational(3)));
}

TEST(RadScalar, NegativeRadicandIsDomainError) {
  EXPECT_THROW(RadScalar::sqrt_of(Rational(-1)), DomainError);
}

TEST(RadScalar, DivisionByZeroThrows) {
  EXPECT_ANY_THROW(RadScalar(1) / Rational(0));
}

TEST(RadScalar, PellSignsFastPath) {
  for (int k = 1; k <= 8; ++k) EXPECT_EQ(pell_gap(k).sign(), pell_sign(k)) << k;
}

TEST(RadScalar, PellSignsNeedExtendedPrecision) {
  // At k = 30 the two terms agree to about 45 digits.
  for (int k = 25; k <= 32; ++k) EXPECT_EQ(pell_gap(k).sign(), pell_sign(k)) << k;
}

TEST(RadScalar, SymbolicFallbackBeyondMaxBits) {
  PolicyGuard g({64, true, 24});
  for (int k = 30; k <= 34; ++k) EXPECT_EQ(pell_gap(k).sign(), pell_sign(k)) << k;
  // Several radicals at once.
  const RadScalar x = pell_gap(31) + pell_gap(30) * RadScalar::sqrt_of(Rational(3));
  EXPECT_EQ(x.sign(), 1);
}

TEST(RadScalar, PrecisionErrorWithoutSymbolicFallback) {
  PolicyGuard g({64, false, 24});
  EXPECT_THROW(pell_gap(40).sign(), PrecisionError);
  EXPECT_EQ(pell_gap(3).sign(), -1);
}

TEST(RadScalar, CompareAndOrder) {
  const RadScalar s2 = RadScalar::sqrt_of(Rational(2));
  EXPECT_LT(RadScalar(Rational(141, 100)), s2);
  EXPECT_GT(RadScalar(Rational(142, 100)), s2);
  EXPECT_EQ(compare(s2 + RadScalar::sqrt_of(Rational(3)), RadScalar::sqrt_of(Rational(10))), -1);
  EXPECT_EQ(max(s2, RadScalar(1)), s2);
  EXPECT_EQ(min(-s2, RadScalar(0)), -s2);
  EXPECT_EQ((-s2).abs(), s2);
}

TEST(RadScalar, CertifyEnclosesValue) {
  const RadScalar x = pell_gap(20);
  const CertifiedFloat c = x.certify(256);
  const double truth = pell_sign(20) / (2.0 * to_double(Rational(pell(20).first)));
  EXPECT_LE(std::abs(c.value - truth), std::abs(truth) * 1e-6 + c.error);
  EXPECT_LT(c.error, std::abs(c.value));
}

TEST(RadScalar, StringAndPairs) {
  const RadScalar x = RadScalar(Rational(1, 2)) + RadScalar::scaled_sqrt(Rational(3, 4), Rational(2));
  EXPECT_EQ(x.to_string(), "1/2 + 3/4*sqrt(2)");
  EXPECT_EQ(RadScalar::from_pairs(x.to_pairs()), x);
  EXPECT_EQ(RadScalar().to_string(), "0/1");
}

TEST(SquarefreeDecompose, Examples) {
  EXPECT_EQ(squarefree_decompose(Integer(72)), std::make_pair(Integer(6), Integer(2)));
  EXPECT_EQ(squarefree_decompose(Integer(1)), std::make_pair(Integer(1), Integer(1)));
  EXPECT_EQ(squarefree_decompose(Integer(30)), std::make_pair(Integer(1), Integer(30)));
  // 65537^2 * 3: the cofactor after trial division is a perfect square.
  const Integer big = Integer(65537) * 65537 * 3;
  EXPECT_EQ(squarefree_decompose(big), std::make_pair(Integer(65537), Integer(3)));
}

// Properties over random elements.

TEST(RadScalarProperty, RingLaws) {
  testing::Gen gen(1);
  for (int i = 0; i < 300; ++i) {
    const RadScalar a = gen.rad();
    const RadScalar b = gen.rad();
    const RadScalar c = gen.rad();
    EXPECT_EQ(a + b, b + a);
    EXPECT_EQ(a * b, b * a);
    EXPECT_EQ(a * (b + c), a * b + a * c);
    EXPECT_EQ((a + b) + c, a + (b + c));
    EXPECT_TRUE((a - a).is_zero());
  }
}

TEST(RadScalarProperty, SignAgreesWithApproximation) {
  testing::Gen gen(2);
  for (int i = 0; i < 300; ++i) {
    const RadScalar a = gen.rad();
    const RadScalar b = gen.rad();
    EXPECT_GE(a.square().sign(), 0);
    EXPECT_EQ(compare(a, b), -compare(b, a));
    const double d = a.approx() - b.approx();
    if (std::abs(d) > 1e-9) EXPECT_EQ(compare(a, b), d > 0 ? 1 : -1);
    if (a.is_zero()) EXPECT_EQ(a.sign(), 0);
    else EXPECT_NE(a.sign(), 0);
  }
}

TEST(RadScalarProperty, OrderIsTransitive) {
  testing::Gen gen(3);
  for (int i = 0; i < 200; ++i) {
    const RadScalar a = gen.rad();
    const RadScalar b = gen.rad();
    const RadScalar c = gen.rad();
    if (a <= b && b <= c) EXPECT_LE(a, c);
  }
}

}  // namespace
}  // namespace mdlab
