// Copyright 2026 The mdlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "mdlab/mp_transforms.hpp"

#include <algorithm>

#include "mdlab/errors.hpp"
#include "mdlab/parallel.hpp"

namespace mdlab {

namespace {

// Index of the last interval whose lo is <= x, or npos.
template <class Vec, class Lo>
std::size_t floor_index(const Vec& v, const Rational& x, Lo lo) {
  auto it = std::upper_bound(v.begin(), v.end(), x,
                             [&lo](const Rational& val, const auto& e) { return val < lo(e); });
  if (it == v.begin()) return static_cast<std::size_t>(-1);
  return static_cast<std::size_t>(it - v.begin()) - 1;
}

const Rational& rmax(const Rational& a, const Rational& b) { return a < b ? b : a; }
const Rational& rmin(const Rational& a, const Rational& b) { return a < b ? a : b; }

}  // namespace

PwAffineMap::PwAffineMap()
    : pieces_{AffinePiece{Interval(0, 1), Rational(1), Rational(0)}}, domain_(SimpleSet::unit()) {}

PwAffineMap::PwAffineMap(std::vector<AffinePiece> pieces, std::optional<SimpleSet> domain) {
  std::sort(pieces.begin(), pieces.end(),
            [](const AffinePiece& a, const AffinePiece& b) { return a.source.lo < b.source.lo; });
  std::vector<Interval> sources;
  sources.reserve(pieces.size());
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    const auto& p = pieces[i];
    if (p.slope <= 0) throw ValidationError("affine piece slope must be positive");
    if (i > 0 && pieces[i - 1].source.hi > p.source.lo)
      throw ValidationError("affine piece sources overlap at " + to_string(p.source.lo));
    const Rational y0 = p.apply(p.source.lo);
    const Rational y1 = p.apply(p.source.hi);
    if (y0 < 0 || y1 > 1)
      throw ValidationError("affine piece on [" + to_string(p.source.lo) + ", " +
                            to_string(p.source.hi) + ") maps outside [0,1)");
    sources.push_back(p.source);
  }
  const SimpleSet covered(std::move(sources));
  domain_ = domain ? *domain : SimpleSet::unit();
  if (!(covered == domain_)) throw ValidationError("affine pieces do not cover the domain exactly");
  total_ = domain_ == SimpleSet::unit();
  for (auto& p : pieces) {
    if (!pieces_.empty()) {
      auto& b = pieces_.back();
      if (b.source.hi == p.source.lo && b.slope == p.slope && b.offset == p.offset) {
        b.source.hi = p.source.hi;
        continue;
      }
    }
    pieces_.push_back(std::move(p));
  }
}

Rational PwAffineMap::operator()(const Rational& x) const {
  const std::size_t k =
      floor_index(pieces_, x, [](const AffinePiece& p) -> const Rational& { return p.source.lo; });
  if (k == static_cast<std::size_t>(-1) || !pieces_[k].source.contains(x))
    throw DomainError("point " + to_string(x) + " outside the map's domain");
  return pieces_[k].apply(x);
}

SimpleSet PwAffineMap::preimage(const SimpleSet& s) const {
  std::vector<Interval> out;
  const auto& ivs = s.intervals();
  for (const auto& p : pieces_) {
    const Rational y0 = p.apply(p.source.lo);
    const Rational y1 = p.apply(p.source.hi);
    std::size_t k = floor_index(ivs, y0, [](const Interval& iv) -> const Rational& { return iv.lo; });
    if (k == static_cast<std::size_t>(-1)) k = 0;
    for (; k < ivs.size() && ivs[k].lo < y1; ++k) {
      const Rational& lo = rmax(ivs[k].lo, y0);
      const Rational& hi = rmin(ivs[k].hi, y1);
      if (lo < hi) out.emplace_back((lo - p.offset) / p.slope, (hi - p.offset) / p.slope);
    }
  }
  return SimpleSet(std::move(out));
}

SimpleSet PwAffineMap::image(const SimpleSet& s) const {
  std::vector<Interval> out;
  for (const auto& piece : s.intervals()) {
    std::size_t k = floor_index(pieces_, piece.lo,
                                [](const AffinePiece& p) -> const Rational& { return p.source.lo; });
    if (k == static_cast<std::size_t>(-1)) k = 0;
    for (; k < pieces_.size() && pieces_[k].source.lo < piece.hi; ++k) {
      const auto& p = pieces_[k];
      const Rational& lo = rmax(piece.lo, p.source.lo);
      const Rational& hi = rmin(piece.hi, p.source.hi);
      if (lo < hi) out.emplace_back(p.apply(lo), p.apply(hi));
    }
  }
  return SimpleSet(std::move(out));
}

PCF PwAffineMap::pushforward_density() const {
  struct Jump {
    Rational at;
    Rational delta;
  };
  std::vector<Jump> jumps;
  jumps.reserve(2 * pieces_.size());
  for (const auto& p : pieces_) {
    const Rational inv = 1 / p.slope;
    jumps.push_back({p.apply(p.source.lo), inv});
    Rational hi = p.apply(p.source.hi);
    if (hi < 1) jumps.push_back({std::move(hi), -inv});
  }
  std::sort(jumps.begin(), jumps.end(), [](const Jump& a, const Jump& b) { return a.at < b.at; });
  std::vector<Rational> br{Rational(0)};
  std::vector<RadScalar> vals{RadScalar()};
  Rational cur(0);
  for (std::size_t i = 0; i < jumps.size();) {
    const Rational at = jumps[i].at;
    for (; i < jumps.size() && jumps[i].at == at; ++i) cur += jumps[i].delta;
    if (at == 0) {
      vals.back() = RadScalar(cur);
    } else {
      br.push_back(at);
      vals.emplace_back(cur);
    }
  }
  return PCF(std::move(br), std::move(vals));
}

bool PwAffineMap::is_measure_preserving() const {
  return total_ && pushforward_density() == PCF(RadScalar(1));
}

Partition::Partition(std::vector<SimpleSet> blocks) : blocks_(std::move(blocks)) {
  if (blocks_.empty()) throw ValidationError("partition needs at least one block");
  Rational total(0);
  SimpleSet uni;
  for (const auto& b : blocks_) {
    const Rational m = b.measure();
    if (m == 0) throw ValidationError("partition block has measure zero");
    total += m;
    uni = uni.unite(b);
  }
  if (!(uni == SimpleSet::unit())) throw ValidationError("partition blocks do not cover [0,1)");
  if (total != 1) throw ValidationError("partition blocks overlap");
}

std::size_t Partition::block_of(const Rational& x) const {
  for (std::size_t i = 0; i < blocks_.size(); ++i)
    if (blocks_[i].contains(x)) return i;
  throw DomainError("point " + to_string(x) + " not covered by the partition");
}

PwAffineMap xi_map(const SimpleSet& a) {
  const Rational m = a.measure();
  if (m == 0) throw DomainError("xi_map needs a set of positive measure");
  std::vector<AffinePiece> pieces;
  Rational cum(0);
  for (const auto& iv : a.intervals()) {
    pieces.push_back({iv, 1 / m, (cum - iv.lo) / m});
    cum += iv.length();
  }
  return PwAffineMap(std::move(pieces), a);
}

PwAffineMap xi_inverse(const SimpleSet& a) {
  const Rational m = a.measure();
  if (m == 0) throw DomainError("xi_inverse needs a set of positive measure");
  std::vector<AffinePiece> pieces;
  Rational cum(0);
  for (const auto& iv : a.intervals()) {
    pieces.push_back({Interval(cum / m, (cum + iv.length()) / m), m, iv.lo - cum});
    cum += iv.length();
  }
  return PwAffineMap(std::move(pieces));
}

PwAffineMap eta_map(long n) {
  if (n < 1) throw DomainError("eta_map needs n >= 1");
  std::vector<AffinePiece> pieces;
  pieces.reserve(static_cast<std::size_t>(n));
  for (long k = 0; k < n; ++k)
    pieces.push_back({Interval(make_rational(k, n), make_rational(k + 1, n)), Rational(n),
                      Rational(-k)});
  return PwAffineMap(std::move(pieces));
}

PwAffineMap compose(const PwAffineMap& outer, const PwAffineMap& inner) {
  std::vector<AffinePiece> out;
  const auto& op = outer.pieces();
  out.reserve(inner.pieces().size());
  for (const auto& p : inner.pieces()) {
    const Rational y0 = p.apply(p.source.lo);
    const Rational y1 = p.apply(p.source.hi);
    std::size_t k = floor_index(op, y0, [](const AffinePiece& q) -> const Rational& {
      return q.source.lo;
    });
    if (k == static_cast<std::size_t>(-1)) throw DomainError("compose: image outside outer domain");
    Rational covered = y0;
    for (; k < op.size() && op[k].source.lo < y1; ++k) {
      const auto& q = op[k];
      const Rational& z0 = rmax(q.source.lo, y0);
      const Rational& z1 = rmin(q.source.hi, y1);
      if (!(z0 < z1)) continue;
      if (z0 != covered) throw DomainError("compose: image outside outer domain");
      covered = z1;
      out.push_back({Interval((z0 - p.offset) / p.slope, (z1 - p.offset) / p.slope),
                     q.slope * p.slope, q.slope * p.offset + q.offset});
    }
    if (covered != y1) throw DomainError("compose: image outside outer domain");
  }
  return PwAffineMap(std::move(out), inner.domain());
}

PwAffineMap u_map(const SimpleSet& a, long n) {
  if (n < 1) throw DomainError("u_map needs n >= 1");
  const PwAffineMap inner = compose(xi_inverse(a), compose(eta_map(n), xi_map(a)));
  std::vector<AffinePiece> pieces = inner.pieces();
  const SimpleSet rest = a.complement();
  for (const auto& iv : rest.intervals())
    pieces.push_back({iv, Rational(1), Rational(0)});
  return PwAffineMap(std::move(pieces));
}

PwAffineMap u_partition_map(const Partition& partition, long n) {
  if (n < 1) throw DomainError("u_partition_map needs n >= 1");
  std::vector<AffinePiece> pieces;
  for (const auto& block : partition.blocks()) {
    const PwAffineMap inner = compose(xi_inverse(block), compose(eta_map(n), xi_map(block)));
    pieces.insert(pieces.end(), inner.pieces().begin(), inner.pieces().end());
  }
  return PwAffineMap(std::move(pieces));
}

PCF pullback(const PCF& f, const PwAffineMap& tau) {
  if (!tau.is_total()) throw DomainError("pullback needs a map defined on all of [0,1)");
  std::vector<Rational> br;
  std::vector<RadScalar> vals;
  const auto& fb = f.breaks();
  for (const auto& p : tau.pieces()) {
    const Rational y0 = p.apply(p.source.lo);
    const Rational y1 = p.apply(p.source.hi);
    std::size_t k = static_cast<std::size_t>(std::upper_bound(fb.begin(), fb.end(), y0) - fb.begin()) - 1;
    br.push_back(p.source.lo);
    vals.push_back(f.values()[k]);
    for (++k; k < fb.size() && fb[k] < y1; ++k) {
      br.push_back((fb[k] - p.offset) / p.slope);
      vals.push_back(f.values()[k]);
    }
  }
  return PCF(std::move(br), std::move(vals));
}

MeasureReport check_measure_preserving(const PwAffineMap& tau, const std::vector<SimpleSet>& probes) {
  MeasureReport rep;
  rep.probes = probes.size();
  // |tau^{-1}(J)| = integral over J of the pushforward density.
  const PCF density = tau.pushforward_density();
  std::vector<ProbeResult> results(probes.size());
  parallel_for(probes.size(), [&](std::size_t i) {
    ProbeResult r;
    r.probe = probes[i];
    r.measure = probes[i].measure();
    r.preimage_measure = integrate(density, probes[i]).rational();
    r.pass = r.measure == r.preimage_measure && tau.is_total();
    results[i] = std::move(r);
  });
  for (auto& r : results) {
    if (r.pass) continue;
    rep.pass = false;
    ++rep.failures;
    rep.violations.push_back(std::move(r));
  }
  if (!tau.is_total()) rep.pass = false;
  return rep;
}

std::vector<SimpleSet> dyadic_probes(int resolution) {
  if (resolution < 0 || resolution > 24) throw ValidationError("probe resolution must be in [0, 24]");
  std::vector<SimpleSet> out;
  for (int j = 0; j <= resolution; ++j) {
    const long cells = 1L << j;
    for (long k = 0; k < cells; ++k)
      out.push_back(SimpleSet::interval(make_rational(k, cells), make_rational(k + 1, cells)));
  }
  return out;
}

RadScalar correlation_target(const PCF& f, const PCF& g, const Partition& a) {
  RadScalar t;
  for (const auto& block : a.blocks())
    t += (integrate(f, block) * integrate(g, block)) / block.measure();
  return t;
}

std::vector<CorrelationRow> correlation_limit(const PCF& f, const PCF& g, const Partition& a,
                                              const std::vector<long>& n_list) {
  const RadScalar target = correlation_target(f, g, a);
  std::vector<CorrelationRow> rows(n_list.size());
  parallel_for(n_list.size(), [&](std::size_t i) {
    CorrelationRow r;
    r.n = n_list[i];
    r.value = inner(pullback(f, u_partition_map(a, r.n)), g);
    r.target = target;
    r.gap = r.value - target;
    rows[i] = std::move(r);
  });
  return rows;
}

Json to_json(const PwAffineMap& tau) {
  Json pieces = Json::array();
  for (const auto& p : tau.pieces())
    pieces.push_back(Json{{"source", Json::array({to_json(p.source.lo), to_json(p.source.hi)})},
                          {"slope", to_json(p.slope)},
                          {"offset", to_json(p.offset)}});
  return Json{{"domain", to_json(tau.domain())}, {"pieces", pieces}};
}

PwAffineMap pw_affine_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("pieces")) throw ValidationError("map JSON needs 'pieces'");
  std::vector<AffinePiece> pieces;
  for (const auto& p : j.at("pieces")) {
    const auto& s = p.at("source");
    if (!s.is_array() || s.size() != 2) throw ValidationError("malformed piece source");
    pieces.push_back({Interval(rational_from_json(s[0]), rational_from_json(s[1])),
                      rational_from_json(p.at("slope")), rational_from_json(p.at("offset"))});
  }
  std::optional<SimpleSet> domain;
  if (j.contains("domain")) domain = simple_set_from_json(j.at("domain"));
  return PwAffineMap(std::move(pieces), domain);
}

Json to_json(const Partition& p) {
  Json out = Json::array();
  for (const auto& b : p.blocks()) out.push_back(to_json(b));
  return out;
}

Partition partition_from_json(const Json& j) {
  if (!j.is_array()) throw ValidationError("partition JSON must be a list of sets");
  std::vector<SimpleSet> blocks;
  for (const auto& b : j) blocks.push_back(simple_set_from_json(b));
  return Partition(std::move(blocks));
}

}  // namespace mdlab
