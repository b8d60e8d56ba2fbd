// Copyright 2026 The mdlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "mdlab/rational.hpp"

namespace mdlab {

/// Half-open interval [lo, hi) with 0 <= lo < hi <= 1.
struct Interval {
  Rational lo;
  Rational hi;

  Interval() : lo(0), hi(1) {}
  /// Throws ValidationError unless 0 <= lo < hi <= 1.
  Interval(Rational lo_, Rational hi_);

  Rational length() const { return hi - lo; }
  bool contains(const Rational& x) const { return lo <= x && x < hi; }
  friend bool operator==(const Interval& a, const Interval& b) {
    return a.lo == b.lo && a.hi == b.hi;
  }
};

/// Finite union of half-open intervals in [0,1), kept sorted, disjoint and
/// with touching intervals merged.
class SimpleSet {
 public:
  SimpleSet() = default;
  /// Canonicalizes arbitrary (possibly overlapping, unsorted) intervals.
  explicit SimpleSet(std::vector<Interval> intervals);
  static SimpleSet unit() { return SimpleSet({Interval(0, 1)}); }
  static SimpleSet interval(const Rational& lo, const Rational& hi) {
    return SimpleSet({Interval(lo, hi)});
  }

  const std::vector<Interval>& intervals() const { return intervals_; }
  bool empty() const { return intervals_.empty(); }
  Rational measure() const;
  bool contains(const Rational& x) const;

  SimpleSet unite(const SimpleSet& o) const;
  SimpleSet intersect(const SimpleSet& o) const;
  SimpleSet minus(const SimpleSet& o) const;
  SimpleSet complement() const;
  /// Whether this set is a subset of `o`.
  bool subset_of(const SimpleSet& o) const;

  std::string to_string() const;

  friend bool operator==(const SimpleSet& a, const SimpleSet& b) {
    return a.intervals_ == b.intervals_;
  }

 private:
  std::vector<Interval> intervals_;
};

SimpleSet simple_set(std::vector<Interval> intervals);
Rational measure(const SimpleSet& a);

}  // namespace mdlab
