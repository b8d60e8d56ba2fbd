// Copyright 2026 The mdlab Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "generators.hpp"
#include "mdlab/errors.hpp"
#include "mdlab/systems.hpp"

namespace mdlab {
namespace {

Rational q(long a, long b = 1) { return make_rational(a, b); }
RadScalar sqrt_of(long k) { return RadScalar::sqrt_of(Rational(k)); }

TEST(Systems, ClassicalHaarValues) {
  const OrthoSystem h = classical_haar(8);
  EXPECT_EQ(h.at(1), PCF(RadScalar(1)));
  EXPECT_EQ(h.at(2), PCF({0, q(1, 2)}, {RadScalar(1), RadScalar(-1)}));
  EXPECT_EQ(h.at(3), PCF({0, q(1, 4), q(1, 2)}, {sqrt_of(2), -sqrt_of(2), RadScalar(0)}));
  EXPECT_EQ(h.at(8), PCF({0, q(3, 4), q(7, 8)}, {RadScalar(0), RadScalar(2), RadScalar(-2)}));
}

TEST(Systems, SplitOneThirdValues) {
  const OrthoSystem f = generalized_haar(SplitTree::uniform_ratio(2, q(1, 3)));
  // alpha = 1/3, beta = 2/3: sqrt(beta / (alpha (alpha + beta))) = sqrt(2).
  EXPECT_EQ(f.at(2), PCF({0, q(1, 3)}, {sqrt_of(2), -RadScalar::scaled_sqrt(q(1, 2), q(2))}));
  EXPECT_EQ(f.at(3).breaks(), (std::vector<Rational>{0, q(1, 9), q(1, 3)}));
  EXPECT_EQ(l2_norm_sq(f.at(3)), RadScalar(1));
}

TEST(Systems, MidpointTreeIsClassicalHaar) {
  EXPECT_EQ(generalized_haar(SplitTree::midpoint(4)).functions, classical_haar(16).functions);
}

TEST(Systems, SignedVariants) {
  const SplitTree t = SplitTree::random(3, 4);
  const OrthoSystem plain = generalized_haar(t);
  const OrthoSystem flipped = generalized_haar(t.with_signs(std::vector<int>(7, -1)));
  EXPECT_EQ(flipped.at(1), plain.at(1));
  for (std::size_t k = 2; k <= 8; ++k) EXPECT_EQ(flipped.at(k), -plain.at(k));
  EXPECT_TRUE(verify_md(flipped).pass());
}

TEST(Systems, RademacherValues) {
  const OrthoSystem r = rademacher(3);
  EXPECT_EQ(r.at(1), PCF({0, q(1, 2)}, {RadScalar(1), RadScalar(-1)}));
  EXPECT_EQ(r.at(2).pieces(), 4u);
  EXPECT_THROW(rademacher(25), ValidationError);
}

TEST(Systems, VerifyMdPasses) {
  for (const OrthoSystem& s : {classical_haar(32), generalized_haar(SplitTree::random(5, 8, 16)), rademacher(6)}) {
    const MdReport r = verify_md(s);
    EXPECT_TRUE(r.pass());
    EXPECT_TRUE(r.violations.empty());
  }
}

TEST(Systems, VerifyMdNegativeControls) {
  OrthoSystem s = classical_haar(8);
  s.functions[1] = PCF::indicator(SimpleSet::interval(0, q(1, 2)));
  const MdReport r = verify_md(s);
  EXPECT_FALSE(r.mean_zero_ok);
  EXPECT_FALSE(r.orthonormal_ok);
  EXPECT_FALSE(r.pass());

  // h_2 o eta_2 is not constant on the halves of the original filtration.
  const OrthoSystem t = transform_system(classical_haar(4), eta_map(2), false);
  const MdReport rt = verify_md(t);
  EXPECT_FALSE(rt.constant_ok);
  ASSERT_FALSE(rt.violations.empty());
  EXPECT_EQ(rt.violations.front().condition, 1);
  // With the filtration pulled back it is a martingale difference again.
  EXPECT_TRUE(verify_md(transform_system(classical_haar(4), eta_map(2))).constant_ok);
}

TEST(Systems, FiltrationMustRefine) {
  const Partition halves({SimpleSet::interval(0, q(1, 2)), SimpleSet::interval(q(1, 2), 1)});
  const Partition thirds({SimpleSet::interval(0, q(1, 3)), SimpleSet::interval(q(1, 3), 1)});
  EXPECT_THROW(Filtration({halves, thirds}), ValidationError);
  const Filtration f({Partition(), halves});
  EXPECT_EQ(f.children(1, 0).size(), 2u);
  EXPECT_TRUE(f.interval_blocks());
}

TEST(Systems, ExpandExamples) {
  const OrthoSystem h = classical_haar(8);
  const Expansion e = expand(PCF::indicator(SimpleSet::interval(0, q(1, 2))), h, 4);
  EXPECT_EQ(e.coefficients,
            (std::vector<RadScalar>{RadScalar(q(1, 2)), RadScalar(q(1, 2)), RadScalar(0), RadScalar(0)}));
  EXPECT_TRUE(e.residual.is_zero());
  EXPECT_EQ(e.reconstruction, PCF::indicator(SimpleSet::interval(0, q(1, 2))));

  const Expansion third = expand(PCF::indicator(SimpleSet::interval(0, q(1, 3))), h, 8);
  EXPECT_EQ(third.residual.sign(), 1);
  EXPECT_EQ(third.coefficients[0], RadScalar(q(1, 3)));
}

TEST(Systems, QuadrupleCheck) {
  const OrthoSystem h = classical_haar(64);
  const NonOverlapFamily fam = NonOverlapFamily::windows({0, 1, 3, 8, 20, 40, 64}, std::vector<RadScalar>(64, RadScalar(1)));
  EXPECT_EQ(quadruple_check(fam, h, 50, 1).nonzero, 0u);
  const NonOverlapFamily overlap = NonOverlapFamily::unchecked({{1}, {1}, {2}, {2}}, {{1}, {1}, {1}, {1}});
  const QuadrupleReport r = quadruple_check(overlap, h, 5, 1);
  EXPECT_EQ(r.nonzero, r.trials);
  ASSERT_FALSE(r.hits.empty());
  EXPECT_EQ(r.hits.front().integral, RadScalar(1));
  EXPECT_THROW(NonOverlapFamily({{1, 2}, {2}}, {{1, 1}, {1}}), ValidationError);
}

TEST(Systems, JsonRoundTrip) {
  const OrthoSystem s = generalized_haar(SplitTree::random(3, 2));
  const OrthoSystem back = ortho_system_from_json(to_json(s));
  EXPECT_EQ(back.functions, s.functions);
  EXPECT_EQ(back.kind, s.kind);
}

TEST(SystemsProperty, GramIdentity) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const OrthoSystem s = generalized_haar(SplitTree::random(4, seed, 1 + static_cast<int>(seed % 7) + 2));
    for (std::size_t i = 1; i <= s.size(); ++i)
      for (std::size_t j = i; j <= s.size(); ++j)
        EXPECT_EQ(inner(s.at(i), s.at(j)), RadScalar(i == j ? 1 : 0)) << seed << " " << i << " " << j;
  }
}

TEST(SystemsProperty, ExpansionOfStepFunctionsIsExact) {
  testing::Gen gen(31);
  const OrthoSystem h = classical_haar(64);
  for (int i = 0; i < 30; ++i) {
    const PCF f = gen.pcf(6, 10);
    const Expansion e = expand(f, h, 64);
    EXPECT_TRUE(e.residual.is_zero());
    EXPECT_EQ(e.reconstruction, f);
  }
}

}  // namespace
}  // namespace mdlab
