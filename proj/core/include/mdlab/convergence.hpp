// Copyright 2026 The mdlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mdlab/rad_scalar.hpp"
#include "mdlab/serialize.hpp"
#include "mdlab/systems.hpp"

namespace mdlab {

/// A weight omega(n), n >= 1, given by a named formula or a table.
class WeylMultiplier {
 public:
  /// Names: "one", "n", "log" (log2 n), "log1p" (log2(n+1)), "log1p^P" for a
  /// real power P, "log-loglog" (log2(n+1) * log2(log2(n+1) + 1)).
  static WeylMultiplier preset(const std::string& name);
  /// omega(n) = values[n - 1].
  static WeylMultiplier tabulated(std::vector<double> values, std::string name = "table");
  static WeylMultiplier from_function(std::string name, std::function<double(std::size_t)> fn);

  const std::string& name() const { return name_; }
  double operator()(std::size_t n) const;
  /// Largest n the multiplier is defined for.
  std::size_t range() const;

  /// ValidationError unless omega is nondecreasing on [1, n] and positive on [2, n].
  void validate(std::size_t n) const;

 private:
  std::string name_;
  std::function<double(std::size_t)> fn_;
  std::vector<double> table_;
};

/// Finite-truncation diagnostics of a positive series sum_{n >= 2} t_n.
struct SeriesDiag {
  std::size_t last = 0;
  double partial_sum = 0.0;
  /// (2^k, partial sum up to 2^k) for each power of two in range.
  std::vector<std::pair<std::size_t, double>> checkpoints;
  /// Bin k holds sum over 2^k < n <= 2^{k+1}, k = 0, 1, ...
  std::vector<double> bins;
  /// Decay exponent alpha of bin_k ~ k^{-alpha}, fitted on the upper half of the bins.
  std::optional<double> alpha;
  /// Mean ratio bin_{k+1} / bin_k over the last three complete bins.
  std::optional<double> geometric_ratio;
  /// "convergent-signature", "divergent-signature" or "inconclusive".
  std::string verdict;
  std::string note;
};

/// Alpha above this reads as a convergent tail, below kDivergentAlpha as divergent.
inline constexpr double kConvergentAlpha = 1.5;
inline constexpr double kDivergentAlpha = 1.2;

SeriesDiag series_diag(const std::function<double(std::size_t)>& term, std::size_t last);

/// sum 1/(n omega(n)) for 2 <= n <= N.
SeriesDiag weyl_tail_diag(const WeylMultiplier& omega, std::size_t n_max);

struct Lemma2Indices {
  std::vector<std::size_t> indices;  // n_k for k = 1..indices.size()
  bool complete = false;             // false when omega stays below K on the range
};

/// Minimal n_k <= n_max with omega(n_k) >= k, by binary search.
Lemma2Indices lemma2_indices(const WeylMultiplier& omega, std::size_t k_max, std::size_t n_max);
/// The same by linear scan.
Lemma2Indices lemma2_indices_scan(const WeylMultiplier& omega, std::size_t k_max, std::size_t n_max);

struct BlockRow {
  std::size_t k = 0;
  std::size_t lo = 0;  // block is lo < n <= hi
  std::size_t hi = 0;
  RadScalar delta_sq;   // ||delta_k||_2^2
  RadScalar budget;     // sum over the block of a_j^2 ||p_j||^2
  double delta_norm = 0.0;
  double block_kappa = 0.0;  // ||delta_k|| / sqrt(budget), 0 for an empty budget
  double kappa_bound = 0.0;  // K sqrt(k + 1)
  bool within_bound = false;
  double cumulative_delta_sq = 0.0;
  double cumulative_rhs = 0.0;  // sum_{j <= hi} a_j^2 log2 j
  bool cumulative_ok = false;
};

struct Corollary1Report {
  std::vector<BlockRow> blocks;
  double total_delta_sq = 0.0;
  double total_rhs = 0.0;
  bool inequality_holds = false;
  bool all_within_bound = false;
};

/// a_j = j^{-1/2} (log2(j + 2))^{-p}, j = 1..count, as exact rationals of doubles.
/// `name` is "default" (p = 1.1) or "boundary" (p = 1).
std::vector<Rational> coefficient_preset(const std::string& name, std::size_t count);

/// Dyadic block maxima delta_k = max_{2^k < n <= 2^{k+1}} |S_n - S_{2^k}| with
/// S_n = sum_{j <= n} a_j p_j, for k = 1..K. Norms are exact; the log2 sum on
/// the right is in double precision.
Corollary1Report corollary1_sim(const std::vector<Rational>& a, const NonOverlapFamily& family,
                                const OrthoSystem& system, std::size_t k_max, double kappa_constant);

/// Polynomials of a family shuffled within each dyadic block (2^k, 2^{k+1}].
NonOverlapFamily permute_within_blocks(const NonOverlapFamily& family, std::uint64_t seed);

struct Lemma3Report {
  SeriesDiag d3;                 // sum 1/(delta(k) k log2 k)
  std::vector<double> composed;  // omega(n) = delta(n) u(n), n = 1..N
  bool omega_over_log_increasing = false;  // on 2..N
  SeriesDiag omega_diag;         // weyl_tail_diag of the composed multiplier
};

Lemma3Report lemma3_compose(const WeylMultiplier& u, const WeylMultiplier& delta, std::size_t n_max);

Json to_json(const SeriesDiag& d);
Json to_json(const BlockRow& r);

}  // namespace mdlab
