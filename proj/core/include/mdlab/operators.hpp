// Copyright 2026 The mdlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mdlab/pcf.hpp"
#include "mdlab/serialize.hpp"
#include "mdlab/systems.hpp"

namespace mdlab {

/// Largest kappa_ratio / sqrt(log2(n + 1)) measured over the calibration
/// corpus. Single-snapshot families attain it. Used as a regression bound,
/// not as a universal constant.
inline constexpr double kKappaLogBound = 1.0;

/// Skeleton of a monotone family: snapshots p_1..p_n over nested index sets
/// G_1 ⊆ ... ⊆ G_n. Position q holds system index `indices[q]` which first
/// enters at snapshot `steps[q]`. Positions are sorted by (step, index).
struct FamilyStructure {
  std::size_t n = 0;
  std::vector<std::size_t> indices;
  std::vector<std::size_t> steps;

  /// Throws ValidationError unless the sets are nested.
  static FamilyStructure from_sets(const std::vector<std::vector<std::size_t>>& sets);
  /// G_m = {order[0], ..., order[m-1]}.
  static FamilyStructure from_order(const std::vector<std::size_t>& order);
  /// Validates and sorts positions; `coeffs`, when given, is permuted alongside.
  static FamilyStructure make(std::size_t n, std::vector<std::size_t> indices,
                              std::vector<std::size_t> steps,
                              std::vector<double>* coeffs = nullptr);

  std::size_t size() const { return indices.size(); }
  std::vector<std::vector<std::size_t>> sets() const;
  friend bool operator==(const FamilyStructure&, const FamilyStructure&) = default;
};

/// A family of polynomials p_m = sum over G_m of c_j f_j.
class MonotoneFamily {
 public:
  /// Coefficients follow the structure's positions. Throws ValidationError
  /// when all coefficients vanish.
  MonotoneFamily(FamilyStructure structure, std::vector<RadScalar> coeffs);

  const FamilyStructure& structure() const { return structure_; }
  const std::vector<RadScalar>& coeffs() const { return coeffs_; }
  std::size_t n() const { return structure_.n; }

  /// p_m, 1 <= m <= n.
  PCF partial(std::size_t m, const OrthoSystem& system) const;
  MonotoneFamily scaled(const Rational& s) const;

 private:
  FamilyStructure structure_;
  std::vector<RadScalar> coeffs_;
};

/// Common refinement of a list of PCFs with the nonzero values of each
/// function stored per cell in compressed rows, in input order.
struct AtomGrid {
  std::vector<Rational> breaks;
  std::vector<Rational> lengths;
  std::vector<std::size_t> offsets;  // atoms() + 1 entries
  std::vector<std::uint32_t> slots;
  std::vector<RadScalar> values;

  std::size_t atoms() const { return breaks.size(); }
};

AtomGrid build_atom_grid(const std::vector<const PCF*>& fns);

/// Dense coefficients a_1..a_N over a system; zero entries are skipped.
using Coeffs = std::vector<RadScalar>;

/// M f = max over n of |sum_{k<=n} a_k f_k|, partial sums in index order.
PCF maximal_fn(const Coeffs& a, const OrthoSystem& system);
/// (S f)^2 = sum a_k^2 f_k^2.
PCF square_fn_squared(const Coeffs& a, const OrthoSystem& system);
/// S f; throws DomainError if some value of (S f)^2 is irrational.
PCF square_fn(const Coeffs& a, const OrthoSystem& system);
/// sum_k a_k f_k.
PCF polynomial(const Coeffs& a, const OrthoSystem& system);

/// p* = max_m |p_m|, over the family's snapshots only.
PCF pstar(const MonotoneFamily& family, const OrthoSystem& system);

struct KappaRatio {
  RadScalar pstar_sq;  // ||p*||_2^2
  RadScalar pn_sq;     // ||p_n||_2^2
  CertifiedFloat ratio;
};

/// ||p*||_2 / ||p_n||_2 with exact numerator and denominator squares.
KappaRatio kappa_ratio(const MonotoneFamily& family, const OrthoSystem& system);
/// Same ratio computed in double precision from coefficient floats.
double kappa_ratio_float(const FamilyStructure& structure, const std::vector<double>& coeffs,
                         const OrthoSystem& system);

/// Exact kappa ratio squared for a family over distinct Rademacher functions
/// with rational coefficients, using independence: dynamic programming over
/// (partial sum, running max) instead of the 2^N atoms. Throws BudgetError
/// when the state count exceeds `max_states`.
Rational rademacher_kappa_sq(const FamilyStructure& structure, const std::vector<Rational>& coeffs,
                             std::size_t max_states = 4'000'000);

struct MrRow {
  std::size_t n = 0;
  double ratio = 0.0;
  double over_log = 0.0;
  double over_sqrt_log = 0.0;
};

struct MrReport {
  std::vector<MrRow> rows;
  double max_ratio = 0.0;
  double max_over_log = 0.0;
  double max_over_sqrt_log = 0.0;
};

/// kappa ratio of each family against log2(n+1) and sqrt(log2(n+1)).
MrReport mr_ratio_check(const std::vector<MonotoneFamily>& families, const OrthoSystem& system);

struct GoodLambdaRow {
  Rational lambda_factor;  // lambda = lambda_factor * ||f||_2
  Rational eps;
  Rational lhs;  // |{Mf > lambda, Sf < eps lambda}|
  Rational mid;  // |{Mf > lambda}|
  Rational rhs;  // |{Mf > lambda / 2}|
  std::optional<Rational> ratio;  // lhs / rhs when rhs > 0
  double ratio_value = 0.0;
  bool flagged = false;  // rhs == 0
};

struct GoodLambdaTable {
  RadScalar norm_sq;  // ||f||_2^2
  std::vector<GoodLambdaRow> rows;
};

/// Scans |{Mf > lambda, Sf < eps lambda}| against |{Mf > lambda/2}| on the
/// grid, with lambda = t ||f||_2 for t in `lambda_factors`. All comparisons
/// are exact (squares are compared, never roots).
GoodLambdaTable good_lambda_scan(const Coeffs& a, const OrthoSystem& system,
                                 const std::vector<Rational>& lambda_factors,
                                 const std::vector<Rational>& eps_grid);

struct CwwFit {
  bool defined = false;
  double c_fit = 0.0;
  double rms_residual = 0.0;
  std::size_t rows_used = 0;
  std::size_t groups = 0;
};

/// Least squares of log(ratio) on -1/eps^2 with one intercept per lambda
/// group; the slope is c_fit. Groups with fewer than two positive ratios
/// carry no slope information and are dropped.
CwwFit cww_exponent_fit(const std::vector<GoodLambdaRow>& rows);

/// eps_n = (c / ln n)^(1/2) for each n >= 2, as exact rationals of the
/// double values.
std::vector<Rational> eps_grid(const std::vector<long>& n_values, double c = 1.0);

Json to_json(const FamilyStructure& s);
FamilyStructure family_structure_from_json(const Json& j);
Json to_json(const GoodLambdaRow& row);

}  // namespace mdlab
