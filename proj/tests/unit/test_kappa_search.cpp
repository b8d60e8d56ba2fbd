// Copyright 2026 The mdlab Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "generators.hpp"
#include "mdlab/errors.hpp"
#include "mdlab/kappa_search.hpp"
#include "mdlab/lemma1.hpp"

namespace mdlab {
namespace {

const double kKappa2 = std::sqrt((3.0 + std::sqrt(5.0)) / 4.0);

// The n = 2 Haar instance evaluated directly on its two atoms over a grid of
// unit coefficient vectors, refined by golden-section search.
double kappa2_angular() {
  auto r2 = [](double t) {
    const double c = std::cos(t);
    const double s = std::sin(t);
    return 0.5 * (std::max(c * c, (c + s) * (c + s)) + std::max(c * c, (c - s) * (c - s)));
  };
  double best = 0.0;
  int arg = 0;
  const int grid = 4096;
  for (int i = 0; i < grid; ++i)
    if (r2(std::numbers::pi * i / grid) > best) best = r2(std::numbers::pi * i / grid), arg = i;
  double lo = std::numbers::pi * (arg - 1) / grid;
  double hi = std::numbers::pi * (arg + 1) / grid;
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int it = 0; it < 200; ++it) {
    const double a = hi - g * (hi - lo);
    const double b = lo + g * (hi - lo);
    if (r2(a) < r2(b)) lo = a;
    else hi = b;
  }
  return std::sqrt(std::max(best, r2(0.5 * (lo + hi))));
}

TEST(KappaSearch, KappaTwo) {
  const FamilyStructure s = FamilyStructure::from_sets({{1}, {1, 2}});
  const OrthoSystem h = classical_haar(4);
  EXPECT_NEAR(kappa2_angular(), kKappa2, 1e-12);
  const KappaEstimate e = exact_kappa(s, h);
  EXPECT_NEAR(e.value, kKappa2, 1e-12);
  EXPECT_EQ(e.kind, CertificateKind::kExact);
  EXPECT_EQ(e.evaluations, 4u);
  EXPECT_NEAR(alt_max_kappa(s, h).value, kKappa2, 1e-12);
  // The reported witness attains the value.
  EXPECT_NEAR(kappa_ratio(e.witness(), h).ratio.value, e.value, 1e-12);
}

TEST(KappaSearch, ExactBudget) {
  std::vector<std::size_t> order(40);
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i + 1;
  EXPECT_THROW(exact_kappa(FamilyStructure::from_order(order), classical_haar(64)), BudgetError);
}

TEST(KappaSearch, FloatGridMatchesExactRatio) {
  testing::Gen gen(51);
  const OrthoSystem h = generalized_haar(SplitTree::random(5, 1, 8));
  for (int i = 0; i < 30; ++i) {
    const FamilyStructure s = gen.structure(32, static_cast<std::size_t>(gen.integer(1, 8)));
    const std::vector<RadScalar> c = gen.dyadic_coeffs(s.size());
    std::vector<double> cd;
    for (const auto& x : c) cd.push_back(x.approx());
    const FloatGrid grid(s, h);
    const double r = kappa_ratio(MonotoneFamily(s, c), h).ratio.value;
    EXPECT_NEAR(std::sqrt(grid.objective(cd)), r, 1e-12);
    const FloatGrid shared(s, SystemGrid(h, 32));
    EXPECT_NEAR(std::sqrt(shared.objective(cd)), r, 1e-12);
  }
}

TEST(KappaSearch, NuSmallest) {
  NuOptions o;
  o.strategy = NuStrategy::kExhaustive;
  const KappaEstimate e = nu_search(2, o);
  EXPECT_NEAR(e.value, kKappa2, 1e-12);
  ASSERT_TRUE(e.sigma.has_value());
  EXPECT_EQ(e.sigma->size(), 2u);
  EXPECT_EQ(e.kind, CertificateKind::kLowerBound);
  EXPECT_THROW(nu_search(9, o), ValidationError);
  EXPECT_EQ(nu_strategy_from_string("anneal"), NuStrategy::kAnneal);
  EXPECT_THROW(nu_strategy_from_string("genetic"), ValidationError);
}

TEST(KappaSearch, NuWarmStartNeverLoses) {
  NuOptions o;
  o.strategy = NuStrategy::kExhaustive;
  const KappaEstimate four = nu_search(4, o);
  NuOptions r;
  r.strategy = NuStrategy::kRandom;
  r.budget = 3;
  r.warm_start = four;
  const KappaEstimate eight = nu_search(8, r);
  EXPECT_GE(eight.value, four.value - 1e-12);
  // Independent re-evaluation of the certificate.
  EXPECT_NEAR(kappa_ratio(eight.witness(), classical_haar(8)).ratio.value, eight.value, 1e-9);
}

TEST(KappaSearch, NuIsDeterministic) {
  NuOptions o;
  o.budget = 200;
  o.seed = 9;
  const KappaEstimate a = nu_search(6, o);
  const KappaEstimate b = nu_search(6, o);
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.coefficients, b.coefficients);
  EXPECT_EQ(reevaluation_hash(a), reevaluation_hash(b));
}

TEST(KappaSearch, GrowthFitRecoversSqrtLog) {
  std::vector<std::pair<double, double>> pts;
  for (double n : {2.0, 4.0, 8.0, 16.0, 32.0, 64.0}) pts.emplace_back(n, 2.0 * std::sqrt(std::log2(n + 1.0)));
  const GrowthFit g = growth_fit(pts);
  EXPECT_EQ(g.best, "sqrt-log");
  EXPECT_EQ(g.ranking.front(), "sqrt-log");
  EXPECT_NEAR(g.models[1].coefficient, 2.0, 1e-12);
  EXPECT_NEAR(g.models[1].ssr, 0.0, 1e-20);

  std::vector<std::pair<double, double>> flat;
  for (double n : {2.0, 4.0, 8.0}) flat.emplace_back(n, 1.5);
  EXPECT_EQ(growth_fit(flat).best, "constant");
  EXPECT_THROW(growth_fit({{2.0, 1.0}, {4.0, 1.0}}), ValidationError);
  EXPECT_THROW(growth_fit({{2.0, 1.0}, {2.0, 1.1}, {2.0, 1.2}}), ValidationError);
}

TEST(KappaSearch, JsonRoundTripAndHash) {
  NuOptions o;
  o.strategy = NuStrategy::kExhaustive;
  const KappaEstimate e = nu_search(4, o);
  const KappaEstimate back = kappa_estimate_from_json(to_json(e));
  EXPECT_EQ(back.structure, e.structure);
  EXPECT_EQ(back.coefficients, e.coefficients);
  EXPECT_EQ(back.value, e.value);
  EXPECT_EQ(back.sigma, e.sigma);
  EXPECT_EQ(reevaluation_hash(back), reevaluation_hash(e));
  KappaEstimate changed = e;
  changed.coefficients[0] = std::nextafter(changed.coefficients[0], 2.0);
  EXPECT_NE(reevaluation_hash(changed), reevaluation_hash(e));
}

TEST(KappaSearch, SelfTransferKeepsTheValue) {
  NuOptions o;
  o.strategy = NuStrategy::kExhaustive;
  const KappaEstimate e = nu_search(4, o);
  const TransferResult t = transfer_kappa_lower(classical_haar(1024, 0), e, Rational(1, 1024), default_n_schedule());
  ASSERT_FALSE(t.estimate.flagged) << t.estimate.note;
  EXPECT_NEAR(t.transferred.value, e.value, 1e-2);
  EXPECT_TRUE(t.certified);
}

TEST(KappaSearch, ShallowTargetGivesFlaggedTransfer) {
  NuOptions o;
  o.strategy = NuStrategy::kExhaustive;
  const KappaEstimate e = nu_search(4, o);
  const TransferResult t = transfer_kappa_lower(generalized_haar(SplitTree::uniform_ratio(3, Rational(1, 3))), e, Rational(1, 1024), default_n_schedule());
  EXPECT_TRUE(t.estimate.flagged);
  EXPECT_FALSE(t.certified);
}

TEST(KappaSearchProperty, AltMaxMatchesExact) {
  testing::Gen gen(52);
  const std::vector<OrthoSystem> systems = {classical_haar(8), generalized_haar(SplitTree::random(3, 5, 8)),
                                            rademacher(6)};
  int checked = 0;
  for (int i = 0; checked < 24; ++i) {
    const OrthoSystem& sys = systems[static_cast<std::size_t>(i) % systems.size()];
    const std::size_t pool = static_cast<std::size_t>(gen.integer(2, static_cast<long>(std::min<std::size_t>(6, sys.size()))));
    const FamilyStructure s = gen.structure(pool, static_cast<std::size_t>(gen.integer(2, static_cast<long>(pool))));
    KappaEstimate e;
    try {
      e = exact_kappa(s, sys, {14.0});
    } catch (const BudgetError&) {
      continue;
    }
    AltMaxOptions ao;
    ao.seed = static_cast<std::uint64_t>(i);
    EXPECT_NEAR(alt_max_kappa(s, sys, ao).value, e.value, 1e-9) << i;
    ++checked;
  }
}

TEST(KappaSearchProperty, AltMaxTraceIsMonotone) {
  testing::Gen gen(53);
  const OrthoSystem h = classical_haar(64);
  for (int i = 0; i < 20; ++i) {
    const FamilyStructure s = gen.structure(64, static_cast<std::size_t>(gen.integer(2, 12)));
    std::vector<double> trace;
    AltMaxOptions ao;
    ao.restarts = 1;
    ao.trace = &trace;
    alt_max_kappa(s, h, ao);
    ASSERT_FALSE(trace.empty());
    for (std::size_t k = 1; k < trace.size(); ++k) EXPECT_GE(trace[k], trace[k - 1] - 1e-12);
  }
}

TEST(KappaSearchProperty, ObjectiveIsScaleInvariant) {
  testing::Gen gen(54);
  const OrthoSystem h = classical_haar(32);
  for (int i = 0; i < 30; ++i) {
    const FamilyStructure s = gen.structure(32, static_cast<std::size_t>(gen.integer(1, 6)));
    const FloatGrid grid(s, h);
    std::vector<double> c = gen.gaussian_vector(s.size());
    const double base = grid.objective(c);
    for (double& x : c) x *= -3.5;
    EXPECT_NEAR(grid.objective(c), base, 1e-12 * base);
    EXPECT_GE(base, 1.0 - 1e-12);
  }
}

TEST(KappaSearchProperty, TopEigenpairSolvesForm) {
  testing::Gen gen(55);
  const OrthoSystem h = classical_haar(32);
  for (int i = 0; i < 20; ++i) {
    const FamilyStructure s = gen.structure(32, static_cast<std::size_t>(gen.integer(1, 6)));
    const FloatGrid grid(s, h);
    FloatGrid::Pattern pattern;
    grid.objective(gen.gaussian_vector(s.size()), &pattern);
    for (std::size_t limit : {std::size_t{160}, std::size_t{0}}) {
      const Eigenpair e = top_eigenpair(grid, pattern, {}, limit);
      std::vector<double> y;
      grid.apply(pattern, e.vector, y);
      for (std::size_t k = 0; k < y.size(); ++k) EXPECT_NEAR(y[k], e.value * e.vector[k], 1e-8);
    }
  }
}

}  // namespace
}  // namespace mdlab
