// Copyright 2026 The mdlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "mdlab/operators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>

#include "mdlab/errors.hpp"
#include "mdlab/parallel.hpp"

namespace mdlab {

FamilyStructure FamilyStructure::make(std::size_t n, std::vector<std::size_t> indices,
                                      std::vector<std::size_t> steps, std::vector<double>* coeffs) {
  if (n < 1) throw ValidationError("a family needs at least one snapshot");
  if (indices.size() != steps.size()) throw ValidationError("one step per index");
  if (coeffs && coeffs->size() != indices.size()) throw ValidationError("one coefficient per index");
  std::set<std::size_t> seen;
  for (std::size_t q = 0; q < indices.size(); ++q) {
    if (indices[q] == 0) throw ValidationError("system indices are 1-based");
    if (!seen.insert(indices[q]).second)
      throw ValidationError("index " + std::to_string(indices[q]) + " repeated in a family");
    if (steps[q] < 1 || steps[q] > n) throw ValidationError("family step out of range");
  }
  std::vector<std::size_t> order(indices.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return steps[a] != steps[b] ? steps[a] < steps[b] : indices[a] < indices[b];
  });
  FamilyStructure s;
  s.n = n;
  for (std::size_t q : order) {
    s.indices.push_back(indices[q]);
    s.steps.push_back(steps[q]);
  }
  if (coeffs) {
    std::vector<double> c;
    for (std::size_t q : order) c.push_back((*coeffs)[q]);
    *coeffs = std::move(c);
  }
  return s;
}

FamilyStructure FamilyStructure::from_sets(const std::vector<std::vector<std::size_t>>& sets) {
  std::vector<std::size_t> indices;
  std::vector<std::size_t> steps;
  std::set<std::size_t> prev;
  for (std::size_t m = 0; m < sets.size(); ++m) {
    const std::set<std::size_t> cur(sets[m].begin(), sets[m].end());
    if (!std::includes(cur.begin(), cur.end(), prev.begin(), prev.end()))
      throw ValidationError("index sets are not nested at G_" + std::to_string(m + 1));
    for (std::size_t j : cur)
      if (!prev.count(j)) {
        indices.push_back(j);
        steps.push_back(m + 1);
      }
    prev = cur;
  }
  return make(sets.size(), std::move(indices), std::move(steps));
}

FamilyStructure FamilyStructure::from_order(const std::vector<std::size_t>& order) {
  std::vector<std::size_t> steps(order.size());
  std::iota(steps.begin(), steps.end(), 1);
  return make(order.size(), order, std::move(steps));
}

std::vector<std::vector<std::size_t>> FamilyStructure::sets() const {
  std::vector<std::vector<std::size_t>> out(n);
  for (std::size_t m = 1; m <= n; ++m)
    for (std::size_t q = 0; q < size(); ++q)
      if (steps[q] <= m) out[m - 1].push_back(indices[q]);
  for (auto& s : out) std::sort(s.begin(), s.end());
  return out;
}

MonotoneFamily::MonotoneFamily(FamilyStructure structure, std::vector<RadScalar> coeffs)
    : structure_(std::move(structure)), coeffs_(std::move(coeffs)) {
  if (coeffs_.size() != structure_.size()) throw ValidationError("one coefficient per family index");
  if (std::all_of(coeffs_.begin(), coeffs_.end(), [](const RadScalar& c) { return c.is_zero(); }))
    throw ValidationError("family coefficients must not all vanish");
}

PCF MonotoneFamily::partial(std::size_t m, const OrthoSystem& system) const {
  if (m < 1 || m > n()) throw ValidationError("snapshot index out of range");
  std::vector<const PCF*> fns;
  std::vector<RadScalar> cs;
  for (std::size_t q = 0; q < structure_.size() && structure_.steps[q] <= m; ++q) {
    fns.push_back(&system.at(structure_.indices[q]));
    cs.push_back(coeffs_[q]);
  }
  return linear_combination(fns, cs);
}

MonotoneFamily MonotoneFamily::scaled(const Rational& s) const {
  if (s == 0) throw ValidationError("scale factor must be nonzero");
  std::vector<RadScalar> cs = coeffs_;
  for (auto& c : cs) c *= s;
  return MonotoneFamily(structure_, std::move(cs));
}

AtomGrid build_atom_grid(const std::vector<const PCF*>& fns) {
  AtomGrid g;
  g.breaks = common_breaks(fns);
  g.lengths = cell_lengths(g.breaks);
  const std::size_t atoms = g.breaks.size();
  struct Span {
    std::size_t first;
    std::size_t last;  // exclusive
    std::uint32_t slot;
    const RadScalar* value;
  };
  std::vector<Span> spans;
  std::vector<std::size_t> count(atoms + 1, 0);
  for (std::size_t s = 0; s < fns.size(); ++s) {
    const PCF& f = *fns[s];
    for (std::size_t i = 0; i < f.pieces(); ++i) {
      if (f.values()[i].is_zero()) continue;
      const auto lo = static_cast<std::size_t>(
          std::lower_bound(g.breaks.begin(), g.breaks.end(), f.piece_lo(i)) - g.breaks.begin());
      const std::size_t hi =
          i + 1 < f.pieces()
              ? static_cast<std::size_t>(
                    std::lower_bound(g.breaks.begin(), g.breaks.end(), f.breaks()[i + 1]) -
                    g.breaks.begin())
              : atoms;
      spans.push_back({lo, hi, static_cast<std::uint32_t>(s), &f.values()[i]});
      for (std::size_t a = lo; a < hi; ++a) ++count[a + 1];
    }
  }
  std::partial_sum(count.begin(), count.end(), count.begin());
  g.offsets = count;
  g.slots.resize(count.back());
  g.values.resize(count.back());
  std::vector<std::size_t> fill(count.begin(), count.end() - 1);
  for (const auto& sp : spans)
    for (std::size_t a = sp.first; a < sp.last; ++a) {
      g.slots[fill[a]] = sp.slot;
      g.values[fill[a]] = *sp.value;
      ++fill[a];
    }
  return g;
}

namespace {

// Per-atom |running sums| maximized at the end of each group of equal step.
// Returns (max value, final sum) per atom.
struct AtomMax {
  std::vector<RadScalar> max_abs;
  std::vector<RadScalar> final_sum;
};

AtomMax atom_maxima(const AtomGrid& g, const std::vector<RadScalar>& coeffs,
                    const std::vector<std::size_t>& steps) {
  AtomMax out;
  out.max_abs.resize(g.atoms());
  out.final_sum.resize(g.atoms());
  parallel_for(g.atoms(), [&](std::size_t a) {
    RadScalar s;
    RadScalar best;
    for (std::size_t e = g.offsets[a]; e < g.offsets[a + 1]; ++e) {
      const std::uint32_t slot = g.slots[e];
      s += coeffs[slot] * g.values[e];
      const bool closes = e + 1 == g.offsets[a + 1] || steps[g.slots[e + 1]] != steps[slot];
      if (closes) {
        RadScalar v = s.abs();
        if (compare(v, best) > 0) best = std::move(v);
      }
    }
    out.max_abs[a] = std::move(best);
    out.final_sum[a] = std::move(s);
  });
  return out;
}

std::vector<const PCF*> family_functions(const FamilyStructure& s, const OrthoSystem& system) {
  std::vector<const PCF*> fns;
  fns.reserve(s.size());
  for (std::size_t j : s.indices) {
    if (j > system.size())
      throw ValidationError("family uses index " + std::to_string(j) + " beyond the system size " +
                            std::to_string(system.size()));
    fns.push_back(&system.at(j));
  }
  return fns;
}

CertifiedFloat certified_quotient(const CertifiedFloat& a, const CertifiedFloat& b) {
  if (!(b.value - b.error > 0)) throw PrecisionError("denominator enclosure contains zero");
  const double lo = (a.value - a.error) / (b.value + b.error);
  const double hi = (a.value + a.error) / (b.value - b.error);
  CertifiedFloat q;
  q.value = a.value / b.value;
  q.error = std::max(hi - q.value, q.value - lo) +
            4.0 * std::numeric_limits<double>::epsilon() * std::fabs(q.value);
  return q;
}

// Dense coefficients to (functions, coefficients) for the nonzero entries.
void nonzero_terms(const Coeffs& a, const OrthoSystem& system, std::vector<const PCF*>& fns,
                   std::vector<RadScalar>& cs) {
  if (a.size() > system.size()) throw ValidationError("more coefficients than system functions");
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k].is_zero()) continue;
    fns.push_back(&system.functions[k]);
    cs.push_back(a[k]);
  }
}

}  // namespace

PCF maximal_fn(const Coeffs& a, const OrthoSystem& system) {
  std::vector<const PCF*> fns;
  std::vector<RadScalar> cs;
  nonzero_terms(a, system, fns, cs);
  if (fns.empty()) return PCF();
  const AtomGrid g = build_atom_grid(fns);
  std::vector<std::size_t> steps(fns.size());
  std::iota(steps.begin(), steps.end(), 1);
  AtomMax m = atom_maxima(g, cs, steps);
  return PCF(g.breaks, std::move(m.max_abs));
}

PCF square_fn_squared(const Coeffs& a, const OrthoSystem& system) {
  std::vector<const PCF*> fns;
  std::vector<RadScalar> cs;
  nonzero_terms(a, system, fns, cs);
  std::vector<PCF> squares(fns.size());
  parallel_for(fns.size(), [&](std::size_t i) { squares[i] = fns[i]->square(); });
  std::vector<const PCF*> sq;
  for (std::size_t i = 0; i < fns.size(); ++i) {
    sq.push_back(&squares[i]);
    cs[i] = cs[i].square();
  }
  return linear_combination(sq, cs);
}

PCF square_fn(const Coeffs& a, const OrthoSystem& system) {
  return square_fn_squared(a, system).map([](const RadScalar& v) {
    if (!v.is_rational()) throw DomainError("square function value " + v.to_string() + " is not rational");
    return RadScalar::sqrt_of(v.rational());
  });
}

PCF polynomial(const Coeffs& a, const OrthoSystem& system) {
  std::vector<const PCF*> fns;
  std::vector<RadScalar> cs;
  nonzero_terms(a, system, fns, cs);
  return linear_combination(fns, cs);
}

PCF pstar(const MonotoneFamily& family, const OrthoSystem& system) {
  const AtomGrid g = build_atom_grid(family_functions(family.structure(), system));
  AtomMax m = atom_maxima(g, family.coeffs(), family.structure().steps);
  return PCF(g.breaks, std::move(m.max_abs));
}

KappaRatio kappa_ratio(const MonotoneFamily& family, const OrthoSystem& system) {
  const AtomGrid g = build_atom_grid(family_functions(family.structure(), system));
  const AtomMax m = atom_maxima(g, family.coeffs(), family.structure().steps);
  KappaRatio out;
  for (std::size_t a = 0; a < g.atoms(); ++a) {
    if (m.max_abs[a].is_zero()) continue;
    out.pstar_sq += m.max_abs[a].square() * g.lengths[a];
    out.pn_sq += m.final_sum[a].square() * g.lengths[a];
  }
  if (out.pn_sq.is_zero()) throw DomainError("kappa ratio undefined: ||p_n||_2 = 0");
  out.ratio = certified_sqrt(certified_quotient(out.pstar_sq.certify(), out.pn_sq.certify()));
  return out;
}

double kappa_ratio_float(const FamilyStructure& structure, const std::vector<double>& coeffs,
                         const OrthoSystem& system) {
  if (coeffs.size() != structure.size()) throw ValidationError("one coefficient per family index");
  const AtomGrid g = build_atom_grid(family_functions(structure, system));
  double num = 0.0;
  double den = 0.0;
  for (std::size_t a = 0; a < g.atoms(); ++a) {
    double s = 0.0;
    double best = 0.0;
    for (std::size_t e = g.offsets[a]; e < g.offsets[a + 1]; ++e) {
      const std::uint32_t slot = g.slots[e];
      s += coeffs[slot] * g.values[e].approx();
      if (e + 1 == g.offsets[a + 1] || structure.steps[g.slots[e + 1]] != structure.steps[slot])
        best = std::max(best, std::fabs(s));
    }
    const double w = to_double(g.lengths[a]);
    num += w * best * best;
    den += w * s * s;
  }
  if (den <= 0.0) throw DomainError("kappa ratio undefined: ||p_n||_2 = 0");
  return std::sqrt(num / den);
}

MrReport mr_ratio_check(const std::vector<MonotoneFamily>& families, const OrthoSystem& system) {
  MrReport rep;
  rep.rows.resize(families.size());
  parallel_for(families.size(), [&](std::size_t i) {
    MrRow r;
    r.n = families[i].n();
    r.ratio = kappa_ratio(families[i], system).ratio.value;
    const double l = std::log2(static_cast<double>(r.n) + 1.0);
    r.over_log = r.ratio / l;
    r.over_sqrt_log = r.ratio / std::sqrt(l);
    rep.rows[i] = r;
  });
  for (const auto& r : rep.rows) {
    rep.max_ratio = std::max(rep.max_ratio, r.ratio);
    rep.max_over_log = std::max(rep.max_over_log, r.over_log);
    rep.max_over_sqrt_log = std::max(rep.max_over_sqrt_log, r.over_sqrt_log);
  }
  return rep;
}

Json to_json(const FamilyStructure& s) {
  return Json{{"n", s.n}, {"indices", s.indices}, {"steps", s.steps}};
}

FamilyStructure family_structure_from_json(const Json& j) {
  if (!j.is_object()) throw ValidationError("family structure JSON must be an object");
  return FamilyStructure::make(j.at("n").get<std::size_t>(),
                               j.at("indices").get<std::vector<std::size_t>>(),
                               j.at("steps").get<std::vector<std::size_t>>());
}

}  // namespace mdlab
