// Copyright 2026 The mdlab Authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include <random>

#include "mdlab/kappa_search.hpp"
#include "mdlab/lemma1.hpp"
#include "mdlab/operators.hpp"

namespace mdlab {
namespace {

FamilyStructure random_structure(std::size_t pool, std::size_t steps, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> order(pool);
  for (std::size_t i = 0; i < pool; ++i) order[i] = i + 1;
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<std::size_t>> sets;
  std::vector<std::size_t> acc;
  const std::size_t per = std::max<std::size_t>(1, pool / steps);
  for (std::size_t i = 0; i < pool; ++i) {
    acc.push_back(order[i]);
    if ((i + 1) % per == 0 || i + 1 == pool) sets.push_back(acc);
  }
  return FamilyStructure::from_sets(sets);
}

// Sums of surds whose double approximation nearly cancels.
void BM_RadScalarSign(benchmark::State& state) {
  const RadScalar a = RadScalar::sqrt_of(Rational(2)) + RadScalar::sqrt_of(Rational(3));
  const RadScalar b = RadScalar::sqrt_of(Rational(10));
  for (auto _ : state) benchmark::DoNotOptimize(compare(a, b));
}
BENCHMARK(BM_RadScalarSign);

void BM_PcfProduct(benchmark::State& state) {
  const OrthoSystem h = classical_haar(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    PCF acc = h.at(1);
    for (std::size_t i = 2; i <= h.size(); ++i) acc = acc + h.at(i) * h.at(i);
    benchmark::DoNotOptimize(acc);
  }
}
BENCHMARK(BM_PcfProduct)->Arg(64)->Arg(256);

void BM_KappaRatioExact(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const OrthoSystem h = classical_haar(n);
  const FamilyStructure s = random_structure(n, 8, 1);
  const MonotoneFamily fam(s, Coeffs(s.size(), RadScalar(1)));
  for (auto _ : state) benchmark::DoNotOptimize(kappa_ratio(fam, h));
}
BENCHMARK(BM_KappaRatioExact)->Arg(32)->Arg(128);

void BM_KappaRatioFloat(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const OrthoSystem h = classical_haar(n);
  const FamilyStructure s = random_structure(n, 8, 1);
  const std::vector<double> c(s.size(), 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(kappa_ratio_float(s, c, h));
}
BENCHMARK(BM_KappaRatioFloat)->Arg(32)->Arg(128);

void BM_ExactKappa(benchmark::State& state) {
  const OrthoSystem h = classical_haar(8);
  const FamilyStructure s = random_structure(8, static_cast<std::size_t>(state.range(0)), 2);
  for (auto _ : state) benchmark::DoNotOptimize(exact_kappa(s, h));
}
BENCHMARK(BM_ExactKappa)->Arg(2)->Arg(4);

void BM_AltMaxKappa(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const OrthoSystem h = classical_haar(n);
  const FamilyStructure s = random_structure(n, 8, 3);
  for (auto _ : state) benchmark::DoNotOptimize(alt_max_kappa(s, h));
}
BENCHMARK(BM_AltMaxKappa)->Arg(16)->Arg(64);

void BM_Lemma1Run(benchmark::State& state) {
  const OrthoSystem f = generalized_haar(SplitTree::uniform_ratio(3, make_rational(1, 3)));
  const OrthoSystem phi = classical_haar(1024, 0);
  const std::size_t steps = static_cast<std::size_t>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(lemma1_run(f, phi, default_eps(steps), steps, default_n_schedule()));
}
BENCHMARK(BM_Lemma1Run)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace mdlab

BENCHMARK_MAIN();
