// Copyright 2026 The mdlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mdlab/rad_scalar.hpp"
#include "mdlab/rational.hpp"
#include "mdlab/simple_set.hpp"

namespace mdlab {

/// Piecewise-constant function on [0,1). Piece i is [breaks[i], breaks[i+1])
/// with the last piece ending at 1. Canonical form: breaks[0] == 0, strictly
/// increasing, and adjacent pieces carry different values.
class PCF {
 public:
  /// The zero function.
  PCF();
  explicit PCF(const RadScalar& c);
  /// Validates and canonicalizes. Throws ValidationError on malformed input.
  PCF(std::vector<Rational> breaks, std::vector<RadScalar> values);

  static PCF constant(const RadScalar& c) { return PCF(c); }
  /// value on `s`, zero elsewhere.
  static PCF indicator(const SimpleSet& s, const RadScalar& value = RadScalar(1));

  const std::vector<Rational>& breaks() const { return breaks_; }
  const std::vector<RadScalar>& values() const { return values_; }
  std::size_t pieces() const { return values_.size(); }
  const Rational& piece_lo(std::size_t i) const { return breaks_[i]; }
  Rational piece_hi(std::size_t i) const;

  /// Value at x in [0,1). Breakpoints belong to the piece on their right.
  const RadScalar& at(const Rational& x) const;

  bool is_constant() const { return values_.size() == 1; }
  SimpleSet support() const;

  PCF operator-() const;
  PCF& operator+=(const PCF& o);
  PCF& operator-=(const PCF& o);
  friend PCF operator+(const PCF& a, const PCF& b);
  friend PCF operator-(const PCF& a, const PCF& b);
  friend PCF operator*(const PCF& a, const PCF& b);
  PCF scaled(const RadScalar& c) const;
  PCF abs() const;
  PCF square() const;

  friend bool operator==(const PCF& a, const PCF& b) {
    return a.breaks_ == b.breaks_ && a.values_ == b.values_;
  }

  /// Applies `op` piecewise and re-canonicalizes.
  template <class Op>
  PCF map(Op op) const {
    std::vector<RadScalar> vals;
    vals.reserve(values_.size());
    for (const auto& v : values_) vals.push_back(op(v));
    return PCF(breaks_, std::move(vals), Trusted{});
  }

  /// Applies `op` on the common refinement of `a` and `b`.
  template <class Op>
  static PCF combine(const PCF& a, const PCF& b, Op op) {
    std::vector<Rational> br;
    std::vector<RadScalar> vals;
    br.reserve(a.pieces() + b.pieces());
    vals.reserve(a.pieces() + b.pieces());
    std::size_t i = 0;
    std::size_t j = 0;
    while (true) {
      br.push_back(a.breaks_[i] < b.breaks_[j] ? b.breaks_[j] : a.breaks_[i]);
      vals.push_back(op(a.values_[i], b.values_[j]));
      const bool ai = i + 1 < a.breaks_.size();
      const bool bj = j + 1 < b.breaks_.size();
      if (!ai && !bj) break;
      if (ai && (!bj || a.breaks_[i + 1] <= b.breaks_[j + 1])) {
        if (bj && a.breaks_[i + 1] == b.breaks_[j + 1]) ++j;
        ++i;
      } else {
        ++j;
      }
    }
    return PCF(std::move(br), std::move(vals), Trusted{});
  }

  std::string to_string() const;

 private:
  struct Trusted {};
  // Breaks already strictly increasing from 0; merges equal neighbours.
  PCF(std::vector<Rational> breaks, std::vector<RadScalar> values, Trusted);
  void merge_equal();

  std::vector<Rational> breaks_;
  std::vector<RadScalar> values_;
};

PCF max(const PCF& a, const PCF& b);
PCF min(const PCF& a, const PCF& b);

enum class ArithOp { kAdd, kSub, kMul, kScale, kAbs, kMax, kMin };

/// Generic entry point; `kScale` multiplies `f` by the constant value of `g`
/// and `kAbs` ignores `g`.
PCF pcf_arith(const PCF& f, const PCF& g, ArithOp op);

/// sum_i coeffs[i] * fns[i] in one sweep over all breakpoints.
PCF linear_combination(const std::vector<const PCF*>& fns, const std::vector<RadScalar>& coeffs);

/// Sorted union of the breakpoints of every input.
std::vector<Rational> common_breaks(const std::vector<const PCF*>& fns);
/// Values of `f` on each cell of a refinement of its own partition.
std::vector<RadScalar> sample_on(const PCF& f, const std::vector<Rational>& refined_breaks);
/// Lengths of the cells of a partition given by its left endpoints.
std::vector<Rational> cell_lengths(const std::vector<Rational>& breaks);

RadScalar integrate(const PCF& f);
RadScalar integrate(const PCF& f, const SimpleSet& over);
/// <f, g> = integral of f*g over [0,1).
RadScalar inner(const PCF& f, const PCF& g);
/// ||f||_2^2, exact.
RadScalar l2_norm_sq(const PCF& f);

/// Running integral F(x) = int_0^x f, for fast inner products against
/// functions with few pieces. Keeps a reference to `f`.
class PrefixIntegral {
 public:
  explicit PrefixIntegral(const PCF& f);
  RadScalar at(const Rational& x) const;
  RadScalar over(const Rational& a, const Rational& b) const { return at(b) - at(a); }
  /// <f, g>, in time proportional to the pieces of g times log(pieces of f).
  RadScalar inner_with(const PCF& g) const;

 private:
  const PCF& f_;
  std::vector<RadScalar> cum_;  // integral up to each breakpoint
};

/// Square root of a certified enclosure.
CertifiedFloat certified_sqrt(const CertifiedFloat& x);

struct NormResult {
  /// ||f||_2^2 when p == 2.
  std::optional<RadScalar> exact_square;
  CertifiedFloat value;
};

/// L^p norm for p >= 1; p = +infinity gives the sup norm.
NormResult lp_norm(const PCF& f, double p);

/// |{f > lambda}| (strict) or |{f >= lambda}|.
Rational super_level_measure(const PCF& f, const RadScalar& lambda, bool strict = true);
SimpleSet super_level_set(const PCF& f, const RadScalar& lambda, bool strict = true);
/// |{f_k > lambda_k for every k}|.
Rational joint_super_level_measure(const std::vector<std::pair<const PCF*, RadScalar>>& conds,
                                   bool strict = true);

}  // namespace mdlab
