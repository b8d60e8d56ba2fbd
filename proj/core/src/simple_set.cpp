// Copyright 2026 The mdlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "mdlab/simple_set.hpp"

#include <algorithm>
#include <sstream>

#include "mdlab/errors.hpp"

namespace mdlab {

Interval::Interval(Rational lo_, Rational hi_) : lo(std::move(lo_)), hi(std::move(hi_)) {
  lo.canonicalize();
  hi.canonicalize();
  if (lo < 0 || hi > 1)
    throw ValidationError("interval [" + mdlab::to_string(lo) + ", " + mdlab::to_string(hi) +
                          ") leaves [0,1]");
  if (lo >= hi)
    throw ValidationError("interval [" + mdlab::to_string(lo) + ", " + mdlab::to_string(hi) +
                          ") is empty or reversed");
}

SimpleSet::SimpleSet(std::vector<Interval> intervals) {
  std::sort(intervals.begin(), intervals.end(),
            [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  for (auto& iv : intervals) {
    if (!intervals_.empty() && iv.lo <= intervals_.back().hi) {
      if (iv.hi > intervals_.back().hi) intervals_.back().hi = iv.hi;
    } else {
      intervals_.push_back(std::move(iv));
    }
  }
}

Rational SimpleSet::measure() const {
  Rational m(0);
  for (const auto& iv : intervals_) m += iv.hi - iv.lo;
  return m;
}

bool SimpleSet::contains(const Rational& x) const {
  auto it = std::upper_bound(intervals_.begin(), intervals_.end(), x,
                             [](const Rational& v, const Interval& iv) { return v < iv.lo; });
  if (it == intervals_.begin()) return false;
  return x < std::prev(it)->hi;
}

SimpleSet SimpleSet::unite(const SimpleSet& o) const {
  std::vector<Interval> all = intervals_;
  all.insert(all.end(), o.intervals_.begin(), o.intervals_.end());
  return SimpleSet(std::move(all));
}

SimpleSet SimpleSet::intersect(const SimpleSet& o) const {
  SimpleSet out;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < intervals_.size() && j < o.intervals_.size()) {
    const auto& a = intervals_[i];
    const auto& b = o.intervals_[j];
    const Rational& lo = a.lo < b.lo ? b.lo : a.lo;
    const Rational& hi = a.hi < b.hi ? a.hi : b.hi;
    if (lo < hi) out.intervals_.push_back(Interval(lo, hi));
    if (a.hi < b.hi) {
      ++i;
    } else {
      ++j;
    }
  }
  return out;
}

SimpleSet SimpleSet::complement() const {
  SimpleSet out;
  Rational cur(0);
  for (const auto& iv : intervals_) {
    if (cur < iv.lo) out.intervals_.push_back(Interval(cur, iv.lo));
    cur = iv.hi;
  }
  if (cur < 1) out.intervals_.push_back(Interval(cur, Rational(1)));
  return out;
}

SimpleSet SimpleSet::minus(const SimpleSet& o) const { return intersect(o.complement()); }

bool SimpleSet::subset_of(const SimpleSet& o) const { return intersect(o) == *this; }

std::string SimpleSet::to_string() const {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < intervals_.size(); ++i) {
    if (i) os << ", ";
    os << "[" << mdlab::to_string(intervals_[i].lo) << ", " << mdlab::to_string(intervals_[i].hi)
       << ")";
  }
  os << "]";
  return os.str();
}

SimpleSet simple_set(std::vector<Interval> intervals) { return SimpleSet(std::move(intervals)); }

Rational measure(const SimpleSet& a) { return a.measure(); }

}  // namespace mdlab
