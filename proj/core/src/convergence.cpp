// Copyright 2026 The mdlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "mdlab/convergence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "mdlab/errors.hpp"
#include "mdlab/parallel.hpp"

namespace mdlab {

WeylMultiplier WeylMultiplier::preset(const std::string& name) {
  auto lg1 = [](std::size_t n) { return std::log2(static_cast<double>(n) + 1.0); };
  if (name == "one") return from_function(name, [](std::size_t) { return 1.0; });
  if (name == "n") return from_function(name, [](std::size_t n) { return static_cast<double>(n); });
  if (name == "log") return from_function(name, [](std::size_t n) { return std::log2(static_cast<double>(n)); });
  if (name == "log1p") return from_function(name, lg1);
  if (name == "log-loglog")
    return from_function(name, [lg1](std::size_t n) { return lg1(n) * std::log2(lg1(n) + 1.0); });
  if (name.rfind("log1p^", 0) == 0) {
    double p = 0.0;
    try {
      std::size_t used = 0;
      p = std::stod(name.substr(6), &used);
      if (used != name.size() - 6) throw std::invalid_argument(name);
    } catch (const std::exception&) {
      throw ValidationError("bad multiplier power in '" + name + "'");
    }
    return from_function(name, [lg1, p](std::size_t n) { return std::pow(lg1(n), p); });
  }
  throw ValidationError("unknown multiplier '" + name + "' (one, n, log, log1p, log1p^P, log-loglog)");
}

WeylMultiplier WeylMultiplier::tabulated(std::vector<double> values, std::string name) {
  if (values.empty()) throw ValidationError("empty multiplier table");
  WeylMultiplier w;
  w.name_ = std::move(name);
  w.table_ = std::move(values);
  return w;
}

WeylMultiplier WeylMultiplier::from_function(std::string name, std::function<double(std::size_t)> fn) {
  WeylMultiplier w;
  w.name_ = std::move(name);
  w.fn_ = std::move(fn);
  return w;
}

double WeylMultiplier::operator()(std::size_t n) const {
  if (n == 0) throw DomainError("multipliers are indexed from 1");
  if (fn_) return fn_(n);
  if (n > table_.size()) throw DomainError("multiplier table ends at " + std::to_string(table_.size()));
  return table_[n - 1];
}

std::size_t WeylMultiplier::range() const {
  return fn_ ? std::numeric_limits<std::size_t>::max() : table_.size();
}

void WeylMultiplier::validate(std::size_t n) const {
  if (n > range()) throw ValidationError("multiplier '" + name_ + "' is tabulated only up to " + std::to_string(range()));
  double prev = (*this)(1);
  for (std::size_t k = 2; k <= n; ++k) {
    const double v = (*this)(k);
    if (!(v > 0.0)) throw ValidationError("multiplier '" + name_ + "' is not positive at n = " + std::to_string(k));
    if (v < prev) throw ValidationError("multiplier '" + name_ + "' decreases at n = " + std::to_string(k));
    prev = v;
  }
}

SeriesDiag series_diag(const std::function<double(std::size_t)>& term, std::size_t last) {
  if (last < 2) throw ValidationError("series diagnostics need N >= 2");
  SeriesDiag d;
  d.last = last;
  std::size_t next_check = 2;
  std::size_t bin_hi = 2;
  double bin = 0.0;
  for (std::size_t n = 2; n <= last; ++n) {
    const double t = term(n);
    d.partial_sum += t;
    bin += t;
    if (n == next_check) {
      d.checkpoints.emplace_back(n, d.partial_sum);
      next_check *= 2;
    }
    if (n == bin_hi) {
      d.bins.push_back(bin);
      bin = 0.0;
      bin_hi *= 2;
    }
  }
  d.note = "finite truncation at N = " + std::to_string(last) +
           "; evidence only, convergence of the infinite series is not decided";
  const std::size_t kb = d.bins.size();  // bins 0..kb-1 are complete
  if (kb >= 4) {
    double r = 0.0;
    for (std::size_t k = kb - 3; k < kb; ++k) r += d.bins[k] / d.bins[k - 1];
    d.geometric_ratio = r / 3.0;
  }
  // Power law fit over bins k in [kb/2, kb), k >= 1.
  const std::size_t start = std::max<std::size_t>(1, kb / 2);
  if (kb >= start + 3) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double m = static_cast<double>(kb - start);
    bool ok = true;
    for (std::size_t k = start; k < kb; ++k) {
      if (!(d.bins[k] > 0.0)) ok = false;
      const double x = std::log(static_cast<double>(k));
      const double y = std::log(d.bins[k]);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    if (ok) d.alpha = -(m * sxy - sx * sy) / (m * sxx - sx * sx);
  }
  if (!d.alpha)
    d.verdict = "inconclusive";
  else if (*d.alpha > kConvergentAlpha)
    d.verdict = "convergent-signature";
  else if (*d.alpha < kDivergentAlpha)
    d.verdict = "divergent-signature";
  else
    d.verdict = "inconclusive";
  return d;
}

SeriesDiag weyl_tail_diag(const WeylMultiplier& omega, std::size_t n_max) {
  if (n_max < 2) throw ValidationError("N must be at least 2");
  omega.validate(n_max);
  return series_diag([&](std::size_t n) { return 1.0 / (static_cast<double>(n) * omega(n)); }, n_max);
}

Lemma2Indices lemma2_indices(const WeylMultiplier& omega, std::size_t k_max, std::size_t n_max) {
  omega.validate(n_max);
  Lemma2Indices out;
  std::size_t lo = 1;
  for (std::size_t k = 1; k <= k_max; ++k) {
    const double target = static_cast<double>(k);
    if (omega(n_max) < target) return out;
    std::size_t hi = n_max;
    while (lo < hi) {
      const std::size_t mid = lo + (hi - lo) / 2;
      if (omega(mid) >= target)
        hi = mid;
      else
        lo = mid + 1;
    }
    out.indices.push_back(lo);
  }
  out.complete = true;
  return out;
}

Lemma2Indices lemma2_indices_scan(const WeylMultiplier& omega, std::size_t k_max, std::size_t n_max) {
  omega.validate(n_max);
  Lemma2Indices out;
  std::size_t n = 1;
  for (std::size_t k = 1; k <= k_max; ++k) {
    while (n <= n_max && omega(n) < static_cast<double>(k)) ++n;
    if (n > n_max) return out;
    out.indices.push_back(n);
  }
  out.complete = true;
  return out;
}

std::vector<Rational> coefficient_preset(const std::string& name, std::size_t count) {
  double p = 0.0;
  if (name == "default")
    p = 1.1;
  else if (name == "boundary")
    p = 1.0;
  else
    throw ValidationError("unknown coefficient preset '" + name + "' (default, boundary)");
  std::vector<Rational> a;
  a.reserve(count);
  for (std::size_t j = 1; j <= count; ++j) {
    const double x = static_cast<double>(j);
    a.push_back(rational_from_double(std::pow(x, -0.5) * std::pow(std::log2(x + 2.0), -p)));
  }
  return a;
}

Corollary1Report corollary1_sim(const std::vector<Rational>& a, const NonOverlapFamily& family,
                                const OrthoSystem& system, std::size_t k_max, double kappa_constant) {
  if (k_max == 0 || k_max > 24) throw ValidationError("K must be in 1..24");
  const std::size_t top = std::size_t{1} << (k_max + 1);
  if (family.size() < top)
    throw ValidationError("family has " + std::to_string(family.size()) + " polynomials, K = " +
                          std::to_string(k_max) + " needs " + std::to_string(top));
  if (!(kappa_constant > 0.0)) throw ValidationError("block kappa constant must be positive");
  auto coef = [&](std::size_t j) { return j <= a.size() ? a[j - 1] : Rational(0); };
  const Rational kc = rational_from_double(kappa_constant);

  Corollary1Report rep;
  rep.blocks.resize(k_max);
  parallel_for(k_max, [&](std::size_t i) {
    BlockRow r;
    r.k = i + 1;
    r.lo = std::size_t{1} << r.k;
    r.hi = r.lo * 2;
    PCF s;
    PCF m;
    for (std::size_t j = r.lo + 1; j <= r.hi; ++j) {
      const Rational c = coef(j);
      if (c == 0) continue;
      s = s + family.polynomial(j - 1, system).scaled(RadScalar(c));
      m = max(m, s.abs());
      r.budget += RadScalar(c * c) * family.norm_sq(j - 1);
    }
    r.delta_sq = l2_norm_sq(m);
    r.delta_norm = std::sqrt(std::max(0.0, r.delta_sq.approx()));
    r.kappa_bound = kappa_constant * std::sqrt(static_cast<double>(r.k) + 1.0);
    if (r.budget.is_zero()) {
      r.block_kappa = 0.0;
      r.within_bound = r.delta_sq.is_zero();
    } else {
      r.block_kappa = std::sqrt(r.delta_sq.approx() / r.budget.approx());
      r.within_bound = compare(r.delta_sq, r.budget * Rational(kc * kc * static_cast<long>(r.k + 1))) <= 0;
    }
    rep.blocks[i] = std::move(r);
  });
  double cum = 0.0;
  double rhs = 0.0;
  std::size_t j_done = 0;
  rep.all_within_bound = true;
  for (auto& r : rep.blocks) {
    const CertifiedFloat c = r.delta_sq.certify();
    cum += c.value + c.error;
    for (std::size_t j = j_done + 1; j <= r.hi; ++j) {
      const double v = to_double(coef(j));
      rhs += v * v * std::log2(static_cast<double>(j));
    }
    j_done = r.hi;
    r.cumulative_delta_sq = cum;
    r.cumulative_rhs = rhs;
    r.cumulative_ok = cum <= rhs * (1.0 - 1e-12);
    rep.all_within_bound = rep.all_within_bound && r.within_bound;
  }
  rep.total_delta_sq = cum;
  rep.total_rhs = rhs;
  rep.inequality_holds = rep.blocks.back().cumulative_ok || (cum == 0.0 && rhs == 0.0);
  return rep;
}

NonOverlapFamily permute_within_blocks(const NonOverlapFamily& family, std::uint64_t seed) {
  std::vector<std::size_t> order(family.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  // Polynomial index j = position + 1; block (2^k, 2^{k+1}] in 1-based terms.
  for (std::size_t lo = 1; lo < order.size(); lo *= 2) {
    const std::size_t hi = std::min(order.size(), lo * 2);
    std::shuffle(order.begin() + static_cast<long>(lo), order.begin() + static_cast<long>(hi), rng);
  }
  std::vector<std::vector<std::size_t>> sets;
  std::vector<std::vector<RadScalar>> coeffs;
  for (std::size_t i : order) {
    sets.push_back(family.sets()[i]);
    coeffs.push_back(family.coeffs()[i]);
  }
  return NonOverlapFamily(std::move(sets), std::move(coeffs));
}

Lemma3Report lemma3_compose(const WeylMultiplier& u, const WeylMultiplier& delta, std::size_t n_max) {
  if (n_max < 2) throw ValidationError("N must be at least 2");
  delta.validate(n_max);
  u.validate(n_max);
  Lemma3Report rep;
  rep.d3 = series_diag(
      [&](std::size_t k) {
        const double x = static_cast<double>(k);
        return 1.0 / (delta(k) * x * std::log2(x));
      },
      n_max);
  rep.composed.reserve(n_max);
  for (std::size_t n = 1; n <= n_max; ++n) rep.composed.push_back(u(n) * delta(n));
  rep.omega_over_log_increasing = true;
  double prev = 0.0;
  for (std::size_t n = 2; n <= n_max; ++n) {
    const double v = rep.composed[n - 1] / std::log2(static_cast<double>(n));
    if (n > 2 && v < prev) rep.omega_over_log_increasing = false;
    prev = v;
  }
  const WeylMultiplier omega = WeylMultiplier::tabulated(rep.composed, u.name() + "*" + delta.name());
  try {
    rep.omega_diag = weyl_tail_diag(omega, n_max);
  } catch (const ValidationError& e) {
    rep.omega_diag.verdict = "inconclusive";
    rep.omega_diag.note = e.what();
  }
  return rep;
}

Json to_json(const SeriesDiag& d) {
  Json cps = Json::array();
  for (const auto& [n, s] : d.checkpoints) cps.push_back(Json::array({n, s}));
  Json j{{"last", d.last}, {"partial_sum", d.partial_sum}, {"checkpoints", cps}, {"bins", d.bins}};
  j["alpha"] = d.alpha ? Json(*d.alpha) : Json(nullptr);
  j["geometric_ratio"] = d.geometric_ratio ? Json(*d.geometric_ratio) : Json(nullptr);
  j["verdict"] = d.verdict;
  j["note"] = d.note;
  return j;
}

Json to_json(const BlockRow& r) {
  return Json{{"k", r.k},
              {"block", Json::array({r.lo, r.hi})},
              {"delta_sq", to_json(r.delta_sq)},
              {"delta_norm", r.delta_norm},
              {"budget", to_json(r.budget)},
              {"block_kappa", r.block_kappa},
              {"kappa_bound", r.kappa_bound},
              {"within_bound", r.within_bound},
              {"cumulative_delta_sq", r.cumulative_delta_sq},
              {"cumulative_rhs", r.cumulative_rhs},
              {"cumulative_ok", r.cumulative_ok}};
}

}  // namespace mdlab
