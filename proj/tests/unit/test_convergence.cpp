// Copyright 2026 The mdlab Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "generators.hpp"
#include "mdlab/convergence.hpp"
#include "mdlab/errors.hpp"

namespace mdlab {
namespace {

Rational q(long a, long b = 1) { return make_rational(a, b); }

NonOverlapFamily singletons(std::size_t count) {
  std::vector<std::size_t> bounds(count + 1);
  for (std::size_t i = 0; i <= count; ++i) bounds[i] = i;
  return NonOverlapFamily::windows(bounds, std::vector<RadScalar>(count, RadScalar(1)));
}

TEST(Convergence, Presets) {
  EXPECT_DOUBLE_EQ(WeylMultiplier::preset("log")(8), 3.0);
  EXPECT_DOUBLE_EQ(WeylMultiplier::preset("log1p")(7), 3.0);
  EXPECT_DOUBLE_EQ(WeylMultiplier::preset("log1p^2")(3), 4.0);
  EXPECT_DOUBLE_EQ(WeylMultiplier::preset("n")(5), 5.0);
  EXPECT_DOUBLE_EQ(WeylMultiplier::preset("log-loglog")(3), 2.0 * std::log2(3.0));
  EXPECT_THROW(WeylMultiplier::preset("exp"), ValidationError);
  EXPECT_THROW(WeylMultiplier::tabulated({1.0, 0.5}).validate(2), ValidationError);
  EXPECT_NO_THROW(WeylMultiplier::tabulated({0.0, 1.0, 1.0}).validate(3));
}

TEST(Convergence, WeylVerdicts) {
  const std::size_t n = std::size_t{1} << 20;
  EXPECT_EQ(weyl_tail_diag(WeylMultiplier::preset("log1p^2"), n).verdict, "convergent-signature");
  EXPECT_EQ(weyl_tail_diag(WeylMultiplier::preset("n"), n).verdict, "convergent-signature");
  EXPECT_EQ(weyl_tail_diag(WeylMultiplier::preset("one"), n).verdict, "divergent-signature");
  EXPECT_EQ(weyl_tail_diag(WeylMultiplier::preset("log1p"), n).verdict, "divergent-signature");
}

TEST(Convergence, SeriesBinsAndCheckpoints) {
  const SeriesDiag d = series_diag([](std::size_t) { return 1.0; }, 64);
  EXPECT_DOUBLE_EQ(d.partial_sum, 63.0);
  // Bin k covers (2^k, 2^{k+1}].
  ASSERT_GE(d.bins.size(), 5u);
  EXPECT_DOUBLE_EQ(d.bins[0], 1.0);
  EXPECT_DOUBLE_EQ(d.bins[4], 16.0);
  ASSERT_TRUE(d.geometric_ratio.has_value());
  EXPECT_NEAR(*d.geometric_ratio, 2.0, 1e-12);
  EXPECT_EQ(d.checkpoints.back().first, 64u);
  EXPECT_DOUBLE_EQ(d.checkpoints.back().second, 63.0);
  const SeriesDiag tiny = series_diag([](std::size_t) { return 1.0; }, 4);
  EXPECT_EQ(tiny.verdict, "inconclusive");
  EXPECT_FALSE(tiny.alpha.has_value());
}

TEST(Convergence, Lemma2Indices) {
  const Lemma2Indices l = lemma2_indices(WeylMultiplier::preset("log"), 5, 1 << 20);
  EXPECT_TRUE(l.complete);
  EXPECT_EQ(l.indices, (std::vector<std::size_t>{2, 4, 8, 16, 32}));
  const Lemma2Indices short_range = lemma2_indices(WeylMultiplier::preset("log"), 5, 20);
  EXPECT_FALSE(short_range.complete);
  EXPECT_EQ(short_range.indices.size(), 4u);
}

TEST(ConvergenceProperty, BinarySearchMatchesScan) {
  testing::Gen gen(61);
  for (int i = 0; i < 50; ++i) {
    std::vector<double> t(300);
    double v = gen.uniform();
    for (double& x : t) {
      if (gen.coin()) v += gen.uniform() * 0.2;
      x = v;
    }
    const WeylMultiplier w = WeylMultiplier::tabulated(t);
    const auto a = lemma2_indices(w, 40, 300);
    const auto b = lemma2_indices_scan(w, 40, 300);
    EXPECT_EQ(a.indices, b.indices);
    EXPECT_EQ(a.complete, b.complete);
  }
}

TEST(Convergence, CorollaryWithZeroCoefficients) {
  const OrthoSystem h = classical_haar(64, 0);
  const Corollary1Report r = corollary1_sim(std::vector<Rational>(64, q(0)), singletons(64), h, 4, 1.0);
  for (const auto& b : r.blocks) {
    EXPECT_TRUE(b.delta_sq.is_zero());
    EXPECT_TRUE(b.within_bound);
  }
  EXPECT_TRUE(r.inequality_holds);
}

TEST(Convergence, CorollaryWithOneCoefficient) {
  const OrthoSystem h = classical_haar(64, 0);
  std::vector<Rational> a(64, q(0));
  a[9] = q(3, 4);  // j = 10, in block (8, 16]
  const Corollary1Report r = corollary1_sim(a, singletons(64), h, 4, 1.0);
  ASSERT_EQ(r.blocks.size(), 4u);
  EXPECT_EQ(r.blocks[2].k, 3u);
  EXPECT_EQ(r.blocks[2].delta_sq, RadScalar(q(9, 16)));
  EXPECT_EQ(r.blocks[2].budget, RadScalar(q(9, 16)));
  EXPECT_DOUBLE_EQ(r.blocks[2].block_kappa, 1.0);
  EXPECT_TRUE(r.blocks[1].delta_sq.is_zero());
  EXPECT_NEAR(r.total_rhs, 9.0 / 16.0 * std::log2(10.0), 1e-12);
  EXPECT_TRUE(r.all_within_bound);
  EXPECT_THROW(corollary1_sim(a, singletons(16), h, 4, 1.0), ValidationError);
}

TEST(Convergence, CorollaryDefaultPreset) {
  const OrthoSystem h = classical_haar(256, 0);
  const Corollary1Report r = corollary1_sim(coefficient_preset("default", 256), singletons(256), h, 6, 1.0);
  EXPECT_TRUE(r.inequality_holds);
  EXPECT_TRUE(r.all_within_bound);
  for (const auto& b : r.blocks) EXPECT_LE(b.block_kappa, 1.0 + 1e-12);
  EXPECT_THROW(coefficient_preset("steep", 4), ValidationError);
}

TEST(Convergence, PermutationStaysInsideBlocks) {
  const NonOverlapFamily fam = singletons(64);
  const NonOverlapFamily p = permute_within_blocks(fam, 5);
  ASSERT_EQ(p.size(), fam.size());
  EXPECT_EQ(p.sets()[0], fam.sets()[0]);
  bool moved = false;
  for (std::size_t lo = 1; lo < 64; lo *= 2) {
    std::vector<std::vector<std::size_t>> a(fam.sets().begin() + static_cast<long>(lo), fam.sets().begin() + static_cast<long>(2 * lo));
    std::vector<std::vector<std::size_t>> b(p.sets().begin() + static_cast<long>(lo), p.sets().begin() + static_cast<long>(2 * lo));
    moved = moved || a != b;
    std::sort(b.begin(), b.end());
    EXPECT_EQ(a, b);
  }
  EXPECT_TRUE(moved);
}

TEST(Convergence, Lemma3) {
  const std::size_t n = std::size_t{1} << 16;
  const Lemma3Report ok = lemma3_compose(WeylMultiplier::preset("log"), WeylMultiplier::preset("log-loglog"), n);
  EXPECT_EQ(ok.d3.verdict, "convergent-signature");
  EXPECT_TRUE(ok.omega_over_log_increasing);
  EXPECT_EQ(ok.composed.size(), n);
  EXPECT_DOUBLE_EQ(ok.composed[7], 3.0 * WeylMultiplier::preset("log-loglog")(8));
  const Lemma3Report flat = lemma3_compose(WeylMultiplier::preset("log"), WeylMultiplier::preset("one"), n);
  EXPECT_EQ(flat.d3.verdict, "divergent-signature");
}

TEST(Convergence, Json) {
  const SeriesDiag d = weyl_tail_diag(WeylMultiplier::preset("log1p^2"), 1024);
  const Json j = to_json(d);
  EXPECT_EQ(j.at("verdict").get<std::string>(), d.verdict);
  EXPECT_EQ(j.at("bins").size(), d.bins.size());
}

}  // namespace
}  // namespace mdlab
