// Copyright 2026 The mdlab Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "generators.hpp"
#include "mdlab/errors.hpp"
#include "mdlab/pcf.hpp"
#include "mdlab/serialize.hpp"
#include "mdlab/simple_set.hpp"
#include "mdlab/systems.hpp"

namespace mdlab {
namespace {

Rational q(long a, long b = 1) { return make_rational(a, b); }

TEST(SimpleSet, MeasureOfUnion) {
  const SimpleSet s({Interval(0, q(1, 4)), Interval(q(1, 2), q(3, 4))});
  EXPECT_EQ(s.measure(), q(1, 2));
  const SimpleSet overlapping({Interval(0, q(1, 2)), Interval(q(1, 4), q(3, 4))});
  EXPECT_EQ(overlapping.intervals().size(), 1u);
  EXPECT_EQ(overlapping.measure(), q(3, 4));
}

TEST(SimpleSet, AdjacentIntervalsMerge) {
  const SimpleSet s({Interval(q(1, 2), 1), Interval(0, q(1, 2))});
  EXPECT_EQ(s, SimpleSet::unit());
}

TEST(SimpleSet, RejectsBadIntervals) {
  EXPECT_THROW(Interval(q(1, 2), q(1, 2)), ValidationError);
  EXPECT_THROW(Interval(q(-1, 2), q(1, 2)), ValidationError);
  EXPECT_THROW(Interval(0, q(3, 2)), ValidationError);
}

TEST(SimpleSet, Containment) {
  const SimpleSet s({Interval(0, q(1, 4))});
  EXPECT_TRUE(s.contains(0));
  EXPECT_FALSE(s.contains(q(1, 4)));
  EXPECT_TRUE(s.subset_of(SimpleSet::interval(0, q(1, 2))));
  EXPECT_FALSE(SimpleSet::interval(0, q(1, 2)).subset_of(s));
}

TEST(SimpleSetProperty, Algebra) {
  testing::Gen gen(11);
  for (int i = 0; i < 300; ++i) {
    const SimpleSet a = gen.dyadic_set();
    const SimpleSet b = gen.dyadic_set();
    EXPECT_EQ(a.unite(b).measure() + a.intersect(b).measure(), a.measure() + b.measure());
    EXPECT_EQ(a.minus(b).unite(a.intersect(b)), a);
    EXPECT_TRUE(a.minus(b).intersect(b).empty());
    EXPECT_EQ(a.complement().complement(), a);
    EXPECT_EQ(a.complement().measure(), 1 - a.measure());
    EXPECT_EQ(a.unite(b), b.unite(a));
    EXPECT_TRUE(a.intersect(b).subset_of(a));
  }
}

TEST(Pcf, CanonicalizationMergesEqualNeighbours) {
  const PCF f({0, q(1, 4), q(1, 2)}, {RadScalar(1), RadScalar(1), RadScalar(2)});
  EXPECT_EQ(f.pieces(), 2u);
  EXPECT_EQ(f.breaks()[1], q(1, 2));
  EXPECT_THROW(PCF({q(1, 4)}, {RadScalar(1)}), ValidationError);
  EXPECT_THROW(PCF({0, q(1, 2)}, {RadScalar(1)}), ValidationError);
  EXPECT_THROW(PCF({0, q(1, 2), q(1, 4)}, {RadScalar(1), RadScalar(2), RadScalar(3)}), ValidationError);
}

TEST(Pcf, HaarIntegrals) {
  const OrthoSystem h = classical_haar(4);
  const PCF& h3 = h.at(3);
  EXPECT_EQ(integrate(h3, SimpleSet::interval(0, q(1, 4))), RadScalar::scaled_sqrt(q(1, 4), q(2)));
  EXPECT_TRUE(integrate(h3).is_zero());
  EXPECT_EQ(l2_norm_sq(h3), RadScalar(1));
}

TEST(Pcf, MaximalOfTwoPartialSums) {
  const OrthoSystem h = classical_haar(2);
  const PCF s1 = h.at(1);
  const PCF s2 = h.at(1) + h.at(2);
  const PCF m = max(s1.abs(), s2.abs());
  EXPECT_EQ(l2_norm_sq(m), RadScalar(q(5, 2)));
  EXPECT_EQ(super_level_measure(s2, RadScalar(q(3, 2))), q(1, 2));
  EXPECT_EQ(super_level_measure(s2, RadScalar(2)), q(0));
  EXPECT_EQ(super_level_measure(s2, RadScalar(2), false), q(1, 2));
}

TEST(Pcf, JointSuperLevelMeasure) {
  const OrthoSystem h = classical_haar(4);
  // {h_2 > 0} ∩ {h_3 > 0} = [0, 1/4).
  EXPECT_EQ(joint_super_level_measure({{&h.at(2), RadScalar(0)}, {&h.at(3), RadScalar(0)}}), q(1, 4));
  EXPECT_EQ(super_level_set(h.at(3), RadScalar(0)), SimpleSet::interval(0, q(1, 4)));
}

TEST(Pcf, LpNorms) {
  const PCF f({0, q(1, 2)}, {RadScalar(2), RadScalar(-1)});
  const NormResult two = lp_norm(f, 2.0);
  ASSERT_TRUE(two.exact_square.has_value());
  EXPECT_EQ(*two.exact_square, RadScalar(q(5, 2)));
  EXPECT_NEAR(two.value.value, std::sqrt(2.5), two.value.error + 1e-15);
  const NormResult sup = lp_norm(f, std::numeric_limits<double>::infinity());
  EXPECT_DOUBLE_EQ(sup.value.value, 2.0);
  EXPECT_NEAR(lp_norm(f, 1.0).value.value, 1.5, 1e-15);
}

TEST(PcfProperty, PointwiseArithmetic) {
  testing::Gen gen(12);
  for (int i = 0; i < 100; ++i) {
    const PCF f = gen.pcf();
    const PCF g = gen.pcf();
    const PCF sum = f + g;
    const PCF prod = f * g;
    const PCF mx = max(f, g);
    for (int t = 0; t < 10; ++t) {
      const Rational x = gen.dyadic(8) * q(255, 256);
      EXPECT_EQ(sum.at(x), f.at(x) + g.at(x));
      EXPECT_EQ(prod.at(x), f.at(x) * g.at(x));
      EXPECT_EQ(mx.at(x), max(f.at(x), g.at(x)));
      EXPECT_EQ(f.abs().at(x), f.at(x).abs());
    }
    EXPECT_EQ(l2_norm_sq(f), integrate(f.square()));
    EXPECT_EQ(inner(f, g), integrate(prod));
    EXPECT_EQ(pcf_arith(f, g, ArithOp::kSub), f - g);
    EXPECT_EQ(linear_combination({&f, &g}, {RadScalar(2), RadScalar(-1)}), f.scaled(RadScalar(2)) - g);
  }
}

TEST(PcfProperty, LevelSetsPartitionTheInterval) {
  testing::Gen gen(13);
  for (int i = 0; i < 100; ++i) {
    const PCF f = gen.pcf();
    for (const RadScalar& v : f.values()) {
      EXPECT_EQ(super_level_measure(f, v) + super_level_measure(-f, -v, false), q(1));
      EXPECT_LE(super_level_measure(f, v), super_level_measure(f, v, false));
      EXPECT_EQ(super_level_set(f, v).measure(), super_level_measure(f, v));
    }
  }
}

TEST(PcfProperty, PrefixIntegralMatchesIntegrate) {
  testing::Gen gen(14);
  for (int i = 0; i < 100; ++i) {
    const PCF f = gen.pcf(8, 12);
    const PCF g = gen.pcf(8, 5);
    const PrefixIntegral pf(f);
    EXPECT_EQ(pf.inner_with(g), inner(f, g));
    Rational a = gen.dyadic(8);
    Rational b = gen.dyadic(8);
    if (b < a) std::swap(a, b);
    if (a < b) EXPECT_EQ(pf.over(a, b), integrate(f, SimpleSet::interval(a, b)));
  }
}

TEST(PcfProperty, JsonRoundTrip) {
  testing::Gen gen(15);
  for (int i = 0; i < 50; ++i) {
    const PCF f = gen.pcf();
    EXPECT_EQ(pcf_from_json(to_json(f)), f);
    const SimpleSet s = gen.dyadic_set();
    EXPECT_EQ(simple_set_from_json(to_json(s)), s);
  }
}

}  // namespace
}  // namespace mdlab
