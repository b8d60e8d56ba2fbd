// Copyright 2026 The mdlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <compare>
#include <string>
#include <utility>
#include <vector>

#include "mdlab/rational.hpp"

namespace mdlab {

/// Controls how RadScalar signs are decided when the double fast path is
/// inconclusive. Precision is raised in doublings up to `max_bits`; past that
/// the symbolic reduction runs if enabled, otherwise PrecisionError is thrown.
struct PrecisionPolicy {
  int max_bits = 256;
  bool symbolic_fallback = true;
  /// Symbolic sign determination is exponential in the number of independent
  /// radicals; beyond this many it gives up with PrecisionError.
  int symbolic_max_radicals = 24;
};

PrecisionPolicy precision_policy();
void set_precision_policy(const PrecisionPolicy& policy);

/// A float together with an absolute error bound: the exact value lies in
/// [value - error, value + error].
struct CertifiedFloat {
  double value = 0.0;
  double error = 0.0;
};

/// Exact element of the field generated by square roots of rationals:
///   x = sum_i r_i * sqrt(k_i)
/// with rational r_i != 0 and distinct square-free integer keys k_i >= 1
/// (k = 1 is the rational part). Because square roots of distinct square-free
/// integers are linearly independent over Q, this form is canonical: equality
/// is structural and x == 0 iff there are no terms.
class RadScalar {
 public:
  struct Term {
    Rational coef;
    Integer key;
  };

  RadScalar() = default;
  RadScalar(const Rational& r);  // NOLINT(google-explicit-constructor)
  RadScalar(long v);             // NOLINT(google-explicit-constructor)
  RadScalar(int v) : RadScalar(static_cast<long>(v)) {}  // NOLINT

  /// sqrt(q) for q >= 0. Throws DomainError for negative q and PrecisionError
  /// if the radicand cannot be certified square-free.
  static RadScalar sqrt_of(const Rational& q);

  /// coef * sqrt(q) for any rational q >= 0.
  static RadScalar scaled_sqrt(const Rational& coef, const Rational& q);

  const std::vector<Term>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  bool is_rational() const;
  /// The rational value, when there is no irrational part.
  Rational rational() const;
  Rational rational_part() const;

  /// Exact sign in {-1, 0, 1}; see PrecisionPolicy.
  int sign() const;

  /// Fast approximation, not certified.
  double approx() const;
  /// Certified enclosure at the given working precision.
  CertifiedFloat certify(int bits = 128) const;

  RadScalar abs() const { return sign() < 0 ? -*this : *this; }
  RadScalar square() const { return *this * *this; }

  RadScalar operator-() const;
  RadScalar& operator+=(const RadScalar& o);
  RadScalar& operator-=(const RadScalar& o);
  RadScalar& operator*=(const RadScalar& o);
  RadScalar& operator*=(const Rational& r);

  friend RadScalar operator+(RadScalar a, const RadScalar& b) { return a += b; }
  friend RadScalar operator-(RadScalar a, const RadScalar& b) { return a -= b; }
  friend RadScalar operator*(const RadScalar& a, const RadScalar& b);
  friend RadScalar operator*(RadScalar a, const Rational& r) { return a *= r; }
  friend RadScalar operator*(const Rational& r, RadScalar a) { return a *= r; }
  /// Division by a nonzero rational.
  friend RadScalar operator/(RadScalar a, const Rational& r);

  friend bool operator==(const RadScalar& a, const RadScalar& b);
  friend std::strong_ordering operator<=>(const RadScalar& a, const RadScalar& b);

  /// Human-readable form, e.g. "1/2 + 3/4*sqrt(2)". Rationals render as "p/q".
  std::string to_string() const;

  /// [[r, q], ...] pairs meaning sum r*sqrt(q).
  std::vector<std::pair<Rational, Rational>> to_pairs() const;
  static RadScalar from_pairs(const std::vector<std::pair<Rational, Rational>>& pairs);

 private:
  void normalize();  // sort by key, merge duplicates, drop zeros
  std::vector<Term> terms_;
};

RadScalar max(const RadScalar& a, const RadScalar& b);
RadScalar min(const RadScalar& a, const RadScalar& b);

/// Sign of a - b.
int compare(const RadScalar& a, const RadScalar& b);

/// n = outside^2 * core with core square-free. Trial division by primes below
/// 2^16; a remaining cofactor is certified when it is a perfect square or
/// smaller than the cube of the sieve bound. Throws PrecisionError otherwise.
std::pair<Integer, Integer> squarefree_decompose(const Integer& n);

}  // namespace mdlab
