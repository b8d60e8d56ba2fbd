// Copyright 2026 The mdlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "mdlab/pcf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mdlab/errors.hpp"

namespace mdlab {

PCF::PCF() : breaks_{Rational(0)}, values_{RadScalar()} {}

PCF::PCF(const RadScalar& c) : breaks_{Rational(0)}, values_{c} {}

PCF::PCF(std::vector<Rational> breaks, std::vector<RadScalar> values) {
  if (breaks.empty() || breaks.size() != values.size())
    throw ValidationError("PCF needs one value per breakpoint");
  if (breaks.front() != 0) throw ValidationError("PCF breakpoints must start at 0");
  for (std::size_t i = 1; i < breaks.size(); ++i)
    if (!(breaks[i - 1] < breaks[i]))
      throw ValidationError("PCF breakpoints must be strictly increasing");
  if (!(breaks.back() < 1)) throw ValidationError("PCF breakpoints must be below 1");
  breaks_ = std::move(breaks);
  values_ = std::move(values);
  merge_equal();
}

PCF::PCF(std::vector<Rational> breaks, std::vector<RadScalar> values, Trusted)
    : breaks_(std::move(breaks)), values_(std::move(values)) {
  merge_equal();
}

void PCF::merge_equal() {
  std::size_t w = 0;
  for (std::size_t r = 1; r < values_.size(); ++r) {
    if (values_[r] == values_[w]) continue;
    ++w;
    if (w != r) {
      breaks_[w] = std::move(breaks_[r]);
      values_[w] = std::move(values_[r]);
    }
  }
  breaks_.resize(w + 1);
  values_.resize(w + 1);
}

PCF PCF::indicator(const SimpleSet& s, const RadScalar& value) {
  std::vector<Rational> br{Rational(0)};
  std::vector<RadScalar> vals{RadScalar()};
  for (const auto& iv : s.intervals()) {
    if (iv.lo == 0) {
      vals.back() = value;
    } else {
      br.push_back(iv.lo);
      vals.push_back(value);
    }
    if (iv.hi < 1) {
      br.push_back(iv.hi);
      vals.emplace_back();
    }
  }
  return PCF(std::move(br), std::move(vals), Trusted{});
}

Rational PCF::piece_hi(std::size_t i) const {
  return i + 1 < breaks_.size() ? breaks_[i + 1] : Rational(1);
}

const RadScalar& PCF::at(const Rational& x) const {
  if (x < 0 || x >= 1) throw DomainError("PCF evaluated outside [0,1): " + mdlab::to_string(x));
  auto it = std::upper_bound(breaks_.begin(), breaks_.end(), x);
  return values_[static_cast<std::size_t>(it - breaks_.begin()) - 1];
}

SimpleSet PCF::support() const {
  std::vector<Interval> ivs;
  for (std::size_t i = 0; i < pieces(); ++i)
    if (!values_[i].is_zero()) ivs.emplace_back(breaks_[i], piece_hi(i));
  return SimpleSet(std::move(ivs));
}

PCF PCF::operator-() const {
  return map([](const RadScalar& v) { return -v; });
}

PCF& PCF::operator+=(const PCF& o) { return *this = *this + o; }
PCF& PCF::operator-=(const PCF& o) { return *this = *this - o; }

PCF operator+(const PCF& a, const PCF& b) {
  return PCF::combine(a, b, [](const RadScalar& x, const RadScalar& y) { return x + y; });
}
PCF operator-(const PCF& a, const PCF& b) {
  return PCF::combine(a, b, [](const RadScalar& x, const RadScalar& y) { return x - y; });
}
PCF operator*(const PCF& a, const PCF& b) {
  return PCF::combine(a, b, [](const RadScalar& x, const RadScalar& y) { return x * y; });
}

PCF PCF::scaled(const RadScalar& c) const {
  return map([&c](const RadScalar& v) { return v * c; });
}

PCF PCF::abs() const {
  return map([](const RadScalar& v) { return v.abs(); });
}

PCF PCF::square() const {
  return map([](const RadScalar& v) { return v.square(); });
}

std::string PCF::to_string() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < pieces(); ++i) {
    if (i) os << "; ";
    os << "[" << mdlab::to_string(breaks_[i]) << ", " << mdlab::to_string(piece_hi(i))
       << "): " << values_[i].to_string();
  }
  return os.str();
}

PCF max(const PCF& a, const PCF& b) {
  return PCF::combine(a, b, [](const RadScalar& x, const RadScalar& y) { return max(x, y); });
}

PCF min(const PCF& a, const PCF& b) {
  return PCF::combine(a, b, [](const RadScalar& x, const RadScalar& y) { return min(x, y); });
}

PCF pcf_arith(const PCF& f, const PCF& g, ArithOp op) {
  switch (op) {
    case ArithOp::kAdd:
      return f + g;
    case ArithOp::kSub:
      return f - g;
    case ArithOp::kMul:
      return f * g;
    case ArithOp::kScale:
      if (!g.is_constant()) throw ValidationError("scale needs a constant factor");
      return f.scaled(g.values().front());
    case ArithOp::kAbs:
      return f.abs();
    case ArithOp::kMax:
      return max(f, g);
    case ArithOp::kMin:
      return min(f, g);
  }
  throw ValidationError("unknown PCF operation");
}

PCF linear_combination(const std::vector<const PCF*>& fns, const std::vector<RadScalar>& coeffs) {
  if (fns.size() != coeffs.size()) throw ValidationError("one coefficient per function");
  struct Jump {
    const Rational* at;
    RadScalar delta;
  };
  std::vector<Jump> jumps;
  RadScalar base;
  for (std::size_t k = 0; k < fns.size(); ++k) {
    if (coeffs[k].is_zero()) continue;
    const PCF& f = *fns[k];
    base += coeffs[k] * f.values()[0];
    for (std::size_t i = 1; i < f.pieces(); ++i)
      jumps.push_back({&f.breaks()[i], coeffs[k] * (f.values()[i] - f.values()[i - 1])});
  }
  std::stable_sort(jumps.begin(), jumps.end(),
                   [](const Jump& x, const Jump& y) { return *x.at < *y.at; });
  std::vector<Rational> br{Rational(0)};
  std::vector<RadScalar> vals{base};
  for (std::size_t i = 0; i < jumps.size();) {
    RadScalar v = vals.back();
    const Rational& at = *jumps[i].at;
    for (; i < jumps.size() && *jumps[i].at == at; ++i) v += jumps[i].delta;
    br.push_back(at);
    vals.push_back(std::move(v));
  }
  return PCF(std::move(br), std::move(vals));
}

std::vector<Rational> common_breaks(const std::vector<const PCF*>& fns) {
  std::vector<Rational> all;
  for (const PCF* f : fns) all.insert(all.end(), f->breaks().begin(), f->breaks().end());
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  if (all.empty()) all.emplace_back(0);
  return all;
}

std::vector<RadScalar> sample_on(const PCF& f, const std::vector<Rational>& refined_breaks) {
  std::vector<RadScalar> out;
  out.reserve(refined_breaks.size());
  std::size_t i = 0;
  for (const auto& b : refined_breaks) {
    while (i + 1 < f.pieces() && f.breaks()[i + 1] <= b) ++i;
    out.push_back(f.values()[i]);
  }
  return out;
}

std::vector<Rational> cell_lengths(const std::vector<Rational>& breaks) {
  std::vector<Rational> out(breaks.size());
  for (std::size_t i = 0; i < breaks.size(); ++i)
    out[i] = (i + 1 < breaks.size() ? breaks[i + 1] : Rational(1)) - breaks[i];
  return out;
}

RadScalar integrate(const PCF& f) {
  RadScalar out;
  for (std::size_t i = 0; i < f.pieces(); ++i)
    if (!f.values()[i].is_zero()) out += f.values()[i] * (f.piece_hi(i) - f.piece_lo(i));
  return out;
}

RadScalar integrate(const PCF& f, const SimpleSet& over) {
  RadScalar out;
  std::size_t i = 0;
  for (const auto& iv : over.intervals()) {
    while (i + 1 < f.pieces() && f.breaks()[i + 1] <= iv.lo) ++i;
    for (std::size_t k = i; k < f.pieces() && f.piece_lo(k) < iv.hi; ++k) {
      const Rational hi = f.piece_hi(k);
      const Rational& lo = f.piece_lo(k) < iv.lo ? iv.lo : f.piece_lo(k);
      const Rational& up = hi < iv.hi ? hi : iv.hi;
      if (lo < up && !f.values()[k].is_zero()) out += f.values()[k] * Rational(up - lo);
    }
  }
  return out;
}

RadScalar inner(const PCF& f, const PCF& g) {
  RadScalar out;
  std::size_t i = 0;
  std::size_t j = 0;
  while (true) {
    const Rational& lo = f.breaks()[i] < g.breaks()[j] ? g.breaks()[j] : f.breaks()[i];
    const Rational fh = f.piece_hi(i);
    const Rational gh = g.piece_hi(j);
    const Rational& hi = fh < gh ? fh : gh;
    if (!f.values()[i].is_zero() && !g.values()[j].is_zero())
      out += (f.values()[i] * g.values()[j]) * Rational(hi - lo);
    if (hi == 1) break;
    if (fh == hi) ++i;
    if (gh == hi) ++j;
  }
  return out;
}

RadScalar l2_norm_sq(const PCF& f) {
  RadScalar out;
  for (std::size_t i = 0; i < f.pieces(); ++i)
    if (!f.values()[i].is_zero()) out += f.values()[i].square() * (f.piece_hi(i) - f.piece_lo(i));
  return out;
}

PrefixIntegral::PrefixIntegral(const PCF& f) : f_(f) {
  cum_.reserve(f.pieces() + 1);
  cum_.emplace_back();
  for (std::size_t i = 0; i < f.pieces(); ++i) {
    RadScalar next = cum_.back();
    if (!f.values()[i].is_zero()) next += f.values()[i] * (f.piece_hi(i) - f.piece_lo(i));
    cum_.push_back(std::move(next));
  }
}

RadScalar PrefixIntegral::at(const Rational& x) const {
  if (x <= 0) return RadScalar();
  if (x >= 1) return cum_.back();
  const auto& br = f_.breaks();
  const auto k = static_cast<std::size_t>(std::upper_bound(br.begin(), br.end(), x) - br.begin()) - 1;
  RadScalar out = cum_[k];
  if (!f_.values()[k].is_zero()) out += f_.values()[k] * Rational(x - br[k]);
  return out;
}

RadScalar PrefixIntegral::inner_with(const PCF& g) const {
  RadScalar out;
  for (std::size_t i = 0; i < g.pieces(); ++i)
    if (!g.values()[i].is_zero()) out += g.values()[i] * over(g.piece_lo(i), g.piece_hi(i));
  return out;
}

CertifiedFloat certified_sqrt(const CertifiedFloat& x) {
  const double lo = std::max(0.0, x.value - x.error);
  const double hi = x.value + x.error;
  CertifiedFloat out;
  out.value = std::sqrt(std::max(0.0, x.value));
  const double spread = std::max(std::sqrt(hi) - out.value, out.value - std::sqrt(lo));
  // Two extra ulps cover the rounding of the square roots above.
  out.error = spread + 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, out.value);
  return out;
}

NormResult lp_norm(const PCF& f, double p) {
  if (!(p >= 1.0)) throw ValidationError("lp_norm needs p >= 1");
  NormResult out;
  if (p == 2.0) {
    out.exact_square = l2_norm_sq(f);
    out.value = certified_sqrt(out.exact_square->certify());
    return out;
  }
  if (std::isinf(p)) {
    double best = 0.0;
    double err = 0.0;
    for (const auto& v : f.values()) {
      const CertifiedFloat c = v.certify();
      if (std::fabs(c.value) + c.error > best + err) {
        best = std::fabs(c.value);
        err = c.error;
      }
    }
    out.value = {best, err};
    return out;
  }
  double lo = 0.0;
  double hi = 0.0;
  for (std::size_t i = 0; i < f.pieces(); ++i) {
    const CertifiedFloat c = f.values()[i].certify();
    const double len = to_double(f.piece_hi(i) - f.piece_lo(i));
    const double a = std::max(0.0, std::fabs(c.value) - c.error);
    const double b = std::fabs(c.value) + c.error;
    lo += len * std::pow(a, p);
    hi += len * std::pow(b, p);
  }
  const double l = std::pow(lo, 1.0 / p);
  const double h = std::pow(hi, 1.0 / p);
  const double eps = 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, h);
  out.value = {0.5 * (l + h), 0.5 * (h - l) + eps};
  return out;
}

namespace {

bool passes(const RadScalar& v, const RadScalar& lambda, bool strict) {
  const int c = compare(v, lambda);
  return strict ? c > 0 : c >= 0;
}

}  // namespace

Rational super_level_measure(const PCF& f, const RadScalar& lambda, bool strict) {
  Rational m(0);
  for (std::size_t i = 0; i < f.pieces(); ++i)
    if (passes(f.values()[i], lambda, strict)) m += f.piece_hi(i) - f.piece_lo(i);
  return m;
}

SimpleSet super_level_set(const PCF& f, const RadScalar& lambda, bool strict) {
  std::vector<Interval> ivs;
  for (std::size_t i = 0; i < f.pieces(); ++i)
    if (passes(f.values()[i], lambda, strict)) ivs.emplace_back(f.piece_lo(i), f.piece_hi(i));
  return SimpleSet(std::move(ivs));
}

Rational joint_super_level_measure(const std::vector<std::pair<const PCF*, RadScalar>>& conds,
                                   bool strict) {
  if (conds.empty()) return Rational(1);
  std::vector<const PCF*> fns;
  for (const auto& c : conds) fns.push_back(c.first);
  const auto br = common_breaks(fns);
  const auto len = cell_lengths(br);
  std::vector<bool> ok(br.size(), true);
  for (const auto& [f, lambda] : conds) {
    const auto vals = sample_on(*f, br);
    for (std::size_t i = 0; i < br.size(); ++i)
      if (ok[i] && !passes(vals[i], lambda, strict)) ok[i] = false;
  }
  Rational m(0);
  for (std::size_t i = 0; i < br.size(); ++i)
    if (ok[i]) m += len[i];
  return m;
}

}  // namespace mdlab
