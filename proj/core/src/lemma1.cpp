// Copyright 2026 The mdlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "mdlab/lemma1.hpp"

#include <algorithm>
#include <map>
#include <random>

#include "mdlab/parallel.hpp"

namespace mdlab {

namespace {

// Structural (not numeric) order on RadScalar vectors, for grouping.
struct StructuralLess {
  static int cmp(const RadScalar& a, const RadScalar& b) {
    const auto& x = a.terms();
    const auto& y = b.terms();
    if (x.size() != y.size()) return x.size() < y.size() ? -1 : 1;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (const int c = ::cmp(x[i].key, y[i].key); c != 0) return c;
      if (const int c = ::cmp(x[i].coef, y[i].coef); c != 0) return c;
    }
    return 0;
  }
  bool operator()(const std::vector<RadScalar>& a, const std::vector<RadScalar>& b) const {
    for (std::size_t i = 0; i < a.size() && i < b.size(); ++i)
      if (const int c = cmp(a[i], b[i]); c != 0) return c < 0;
    return a.size() < b.size();
  }
};

}  // namespace

PCF Lemma1State::polynomial(std::size_t k, const OrthoSystem& phi) const {
  const auto [m, r] = windows.at(k);
  std::vector<const PCF*> fns;
  for (std::size_t i = m + 1; i <= r; ++i) fns.push_back(&phi.at(i));
  return linear_combination(fns, poly_coeffs.at(k));
}

Partition constancy_partition(const std::vector<PCF>& fns) {
  if (fns.empty()) return Partition();
  std::vector<const PCF*> ptrs;
  for (const auto& f : fns) ptrs.push_back(&f);
  const auto br = common_breaks(ptrs);
  std::vector<std::vector<RadScalar>> samples;
  for (const auto* f : ptrs) samples.push_back(sample_on(*f, br));
  std::map<std::vector<RadScalar>, std::size_t, StructuralLess> group_of;
  std::vector<std::vector<Interval>> groups;
  for (std::size_t c = 0; c < br.size(); ++c) {
    std::vector<RadScalar> key;
    key.reserve(samples.size());
    for (const auto& s : samples) key.push_back(s[c]);
    auto [it, fresh] = group_of.emplace(std::move(key), groups.size());
    if (fresh) groups.emplace_back();
    groups[it->second].emplace_back(br[c], c + 1 < br.size() ? br[c + 1] : Rational(1));
  }
  std::vector<SimpleSet> blocks;
  blocks.reserve(groups.size());
  for (auto& g : groups) blocks.emplace_back(std::move(g));
  return Partition(std::move(blocks));
}

std::vector<long> default_n_schedule(int max_log) {
  std::vector<long> out;
  for (int t = 0; t <= max_log; ++t) out.push_back(1L << t);
  return out;
}

std::vector<Rational> default_eps(std::size_t count) {
  std::vector<Rational> out;
  for (std::size_t k = 1; k <= count; ++k) out.push_back(pow2(-static_cast<long>(k) - 1));
  return out;
}

Lemma1State lemma1_step(const Lemma1State& state, const PCF& f_next, const OrthoSystem& phi,
                        const Rational& eps, const std::vector<long>& n_schedule) {
  if (eps <= 0) throw ValidationError("eps must be positive");
  if (n_schedule.empty()) throw ValidationError("n schedule is empty");
  const RadScalar quarter_eps2(eps * eps / 4);
  const std::size_t m = state.max_index();
  Lemma1StepRecord rec;
  rec.step = state.step + 1;
  rec.m = m;
  rec.eps = eps;

  PwAffineMap tau = state.tau;
  PCF g;
  if (state.step == 0) {
    g = f_next;
    rec.n = 1;
    rec.blocks = 1;
  } else {
    const Partition a = constancy_partition(state.transformed);
    rec.blocks = a.size();
    const PCF g0 = pullback(f_next, state.tau);
    for (const auto& block : a.blocks()) {
      const RadScalar mean = integrate(g0, block);
      if (!mean.is_zero())
        throw ValidationError("next function has integral " + mean.to_string() + " on block " +
                              block.to_string() + " of the constancy partition");
    }
    bool found = false;
    for (long n : n_schedule) {
      PCF cand = pullback(g0, u_partition_map(a, n));
      const PrefixIntegral pi(cand);
      std::vector<RadScalar> c(m);
      parallel_for(m, [&](std::size_t i) { c[i] = pi.inner_with(phi.at(i + 1)); });
      RadScalar head;
      for (const auto& x : c) head += x.square();
      rec.head_trace.emplace_back(n, head);
      if (compare(head, quarter_eps2) < 0) {
        g = std::move(cand);
        rec.n = n;
        rec.head = head;
        tau = compose(state.tau, u_partition_map(a, n));
        found = true;
        break;
      }
    }
    if (!found) {
      std::string trace;
      for (const auto& [n, h] : rec.head_trace)
        trace += " n=" + std::to_string(n) + ":" + std::to_string(h.approx());
      throw ConstructionError("step " + std::to_string(rec.step) +
                              ": n schedule exhausted before the head energy fell below eps^2/4;" +
                              trace);
    }
  }

  const std::size_t total = phi.size();
  const PrefixIntegral pi(g);
  std::vector<RadScalar> c(total);
  parallel_for(total, [&](std::size_t i) { c[i] = pi.inner_with(phi.at(i + 1)); });
  const RadScalar energy = l2_norm_sq(g);
  RadScalar captured;
  for (std::size_t i = 0; i < m && i < total; ++i) captured += c[i].square();
  std::size_t r = 0;
  for (std::size_t i = m; i < total; ++i) {
    captured += c[i].square();
    const RadScalar tail = energy - captured;
    // Cheap float screen before the exact comparison.
    if (tail.approx() > 2.0 * quarter_eps2.approx()) continue;
    if (compare(tail, quarter_eps2) < 0) {
      r = i + 1;
      rec.tail = tail;
      break;
    }
  }
  if (r == 0)
    throw ConstructionError("step " + std::to_string(rec.step) + ": target system of " +
                            std::to_string(total) + " functions too shallow; tail energy " +
                            std::to_string((energy - captured).approx()) + " stays above eps^2/4 = " +
                            std::to_string(quarter_eps2.approx()));
  rec.r = r;

  Lemma1State next = state;
  next.step = rec.step;
  next.tau = std::move(tau);
  std::vector<RadScalar> coeffs(c.begin() + static_cast<long>(m), c.begin() + static_cast<long>(r));
  next.windows.emplace_back(m, r);
  next.poly_coeffs.push_back(coeffs);
  next.transformed.push_back(g);
  const PCF p = next.polynomial(next.windows.size() - 1, phi);
  rec.error_sq = energy - Rational(2) * pi.inner_with(p) + l2_norm_sq(p);
  if (compare(rec.error_sq, RadScalar(Rational(eps * eps))) >= 0)
    throw ConstructionError("step " + std::to_string(rec.step) + ": error certificate failed");
  next.records.push_back(std::move(rec));
  return next;
}

Lemma1Result lemma1_run(const OrthoSystem& f, const OrthoSystem& phi, const std::vector<Rational>& eps,
                        std::size_t steps, const std::vector<long>& n_schedule) {
  if (steps > f.size()) throw ValidationError("more steps than functions in the martingale difference");
  if (eps.size() < steps) throw ValidationError("need one eps per step");
  if (f.filtration && !f.filtration->interval_blocks())
    throw ValidationError("the martingale difference must be based on a filtration of intervals");
  Lemma1Result out;
  for (std::size_t k = 1; k <= steps; ++k)
    out.state = lemma1_step(out.state, f.at(k), phi, eps[k - 1], n_schedule);
  out.transformed.kind = SystemKind::kTransformed;
  out.transformed.functions = out.state.transformed;
  std::vector<std::vector<std::size_t>> sets;
  for (const auto& [m, r] : out.state.windows) {
    std::vector<std::size_t> s;
    for (std::size_t i = m + 1; i <= r; ++i) s.push_back(i);
    sets.push_back(std::move(s));
  }
  out.family = NonOverlapFamily(std::move(sets), out.state.poly_coeffs);
  return out;
}

TransformationReport transformation_check(const OrthoSystem& original, const OrthoSystem& transformed,
                                          const std::vector<LevelProbe>& probes) {
  TransformationReport rep;
  rep.probes = probes.size();
  std::vector<char> bad(probes.size(), 0);
  parallel_for(probes.size(), [&](std::size_t i) {
    const auto& p = probes[i];
    std::vector<std::pair<const PCF*, RadScalar>> a;
    std::vector<std::pair<const PCF*, RadScalar>> b;
    for (std::size_t k = 0; k < p.indices.size(); ++k) {
      a.emplace_back(&original.at(p.indices[k]), p.thresholds[k]);
      b.emplace_back(&transformed.at(p.indices[k]), p.thresholds[k]);
    }
    bad[i] = joint_super_level_measure(a) != joint_super_level_measure(b);
  });
  for (std::size_t i = 0; i < probes.size(); ++i)
    if (bad[i]) {
      ++rep.violations;
      rep.witnesses.push_back(probes[i]);
    }
  return rep;
}

std::vector<LevelProbe> random_level_probes(const OrthoSystem& system, std::size_t count,
                                            std::uint64_t seed, std::size_t max_size) {
  if (system.size() == 0) throw ValidationError("system is empty");
  std::mt19937_64 rng(seed);
  std::vector<LevelProbe> out;
  for (std::size_t t = 0; t < count; ++t) {
    LevelProbe p;
    const std::size_t size =
        std::uniform_int_distribution<std::size_t>(1, std::min(max_size, system.size()))(rng);
    std::vector<std::size_t> idx(system.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i + 1;
    for (std::size_t k = 0; k < size; ++k) {
      std::swap(idx[k], idx[std::uniform_int_distribution<std::size_t>(k, idx.size() - 1)(rng)]);
      const PCF& f = system.at(idx[k]);
      std::vector<RadScalar> vals = f.values();
      std::sort(vals.begin(), vals.end(), [](const RadScalar& x, const RadScalar& y) { return compare(x, y) < 0; });
      vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
      std::vector<RadScalar> cand = vals;
      for (std::size_t i = 0; i + 1 < vals.size(); ++i) cand.push_back((vals[i] + vals[i + 1]) / Rational(2));
      cand.push_back(vals.front() - RadScalar(1));
      cand.push_back(vals.back() + RadScalar(1));
      p.indices.push_back(idx[k]);
      p.thresholds.push_back(cand[std::uniform_int_distribution<std::size_t>(0, cand.size() - 1)(rng)]);
    }
    out.push_back(std::move(p));
  }
  return out;
}

Json to_json(const Lemma1StepRecord& r) {
  Json trace = Json::array();
  for (const auto& [n, h] : r.head_trace)
    trace.push_back(Json{{"n", n}, {"head", to_json(h)}, {"head_float", h.approx()}});
  return Json{{"step", r.step},
              {"n", r.n},
              {"window", Json::array({r.m, r.r})},
              {"eps", to_json(r.eps)},
              {"blocks", r.blocks},
              {"head", to_json(r.head)},
              {"tail", to_json(r.tail)},
              {"error_sq", to_json(r.error_sq)},
              {"error_float", std::sqrt(std::max(0.0, r.error_sq.approx()))},
              {"head_trace", trace}};
}

}  // namespace mdlab
