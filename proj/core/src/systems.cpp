// Copyright 2026 The mdlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "mdlab/systems.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <random>
#include <set>

#include "mdlab/errors.hpp"
#include "mdlab/parallel.hpp"

namespace mdlab {

namespace {

int level_of(std::size_t b) {
  int l = 0;
  while ((std::size_t{2} << l) - 1 <= b) ++l;
  return l;
}

}  // namespace

SplitTree::SplitTree(int depth, const RatioFn& ratio) : depth_(depth) {
  if (depth < 0 || depth > 20) throw ValidationError("split tree depth must be in [0, 20]");
  const std::size_t total = (std::size_t{2} << depth) - 1;
  nodes_.resize(total);
  nodes_[0].interval = Interval(0, 1);
  for (std::size_t b = 0; b < internal_nodes(); ++b) {
    const int l = level_of(b);
    const Rational r = ratio(l, b - ((std::size_t{1} << l) - 1));
    if (r <= 0 || r >= 1) throw ValidationError("split ratio must lie strictly between 0 and 1");
    auto& n = nodes_[b];
    Rational s = n.interval.lo + r * n.interval.length();
    nodes_[2 * b + 1].interval = Interval(n.interval.lo, s);
    nodes_[2 * b + 2].interval = Interval(s, n.interval.hi);
    n.split = std::move(s);
  }
}

SplitTree SplitTree::midpoint(int depth) {
  return SplitTree(depth, [](int, std::size_t) { return Rational(1, 2); });
}

SplitTree SplitTree::uniform_ratio(int depth, const Rational& ratio) {
  return SplitTree(depth, [ratio](int, std::size_t) { return ratio; });
}

SplitTree SplitTree::random(int depth, std::uint64_t seed, int denominator) {
  if (denominator < 2) throw ValidationError("random split denominator must be at least 2");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(1, denominator - 1);
  return SplitTree(depth, [&](int, std::size_t) { return make_rational(pick(rng), denominator); });
}

SplitTree SplitTree::from_splits(int depth, const std::vector<Rational>& splits) {
  if (depth < 0 || depth > 20) throw ValidationError("split tree depth must be in [0, 20]");
  SplitTree t;
  t.depth_ = depth;
  if (splits.size() != t.internal_nodes())
    throw ValidationError("need one split point per internal node");
  t.nodes_.resize((std::size_t{2} << depth) - 1);
  t.nodes_[0].interval = Interval(0, 1);
  for (std::size_t b = 0; b < t.internal_nodes(); ++b) {
    auto& n = t.nodes_[b];
    if (!(n.interval.lo < splits[b] && splits[b] < n.interval.hi))
      throw ValidationError("split point " + to_string(splits[b]) + " not inside its node");
    t.nodes_[2 * b + 1].interval = Interval(n.interval.lo, splits[b]);
    t.nodes_[2 * b + 2].interval = Interval(splits[b], n.interval.hi);
    n.split = splits[b];
  }
  return t;
}

SplitTree SplitTree::with_signs(const std::vector<int>& signs) const {
  if (signs.size() != internal_nodes()) throw ValidationError("need one sign per internal node");
  SplitTree t = *this;
  for (std::size_t b = 0; b < signs.size(); ++b) {
    if (signs[b] != 1 && signs[b] != -1) throw ValidationError("signs must be +1 or -1");
    t.nodes_[b].sign = signs[b];
  }
  return t;
}

std::vector<Rational> SplitTree::max_length_per_level() const {
  std::vector<Rational> out(static_cast<std::size_t>(depth_) + 1, Rational(0));
  for (std::size_t b = 0; b < nodes_.size(); ++b) {
    auto& m = out[static_cast<std::size_t>(level_of(b))];
    if (nodes_[b].interval.length() > m) m = nodes_[b].interval.length();
  }
  return out;
}

Filtration::Filtration(std::vector<Partition> levels) : levels_(std::move(levels)) {
  children_.resize(levels_.empty() ? 0 : levels_.size() - 1);
  for (std::size_t n = 0; n + 1 < levels_.size(); ++n) {
    const auto& parent = levels_[n].blocks();
    const auto& child = levels_[n + 1].blocks();
    struct Owner {
      Rational lo;
      Rational hi;
      std::size_t block;
    };
    std::vector<Owner> owners;
    for (std::size_t p = 0; p < parent.size(); ++p)
      for (const auto& iv : parent[p].intervals()) owners.push_back({iv.lo, iv.hi, p});
    std::sort(owners.begin(), owners.end(), [](const Owner& a, const Owner& b) { return a.lo < b.lo; });
    auto& ch = children_[n];
    ch.assign(parent.size(), {});
    std::vector<Rational> mass(parent.size(), Rational(0));
    for (std::size_t c = 0; c < child.size(); ++c) {
      const Rational& x = child[c].intervals().front().lo;
      auto it = std::upper_bound(owners.begin(), owners.end(), x,
                                 [](const Rational& v, const Owner& o) { return v < o.lo; });
      const std::size_t p = std::prev(it)->block;
      if (!child[c].subset_of(parent[p]))
        throw ValidationError("filtration level " + std::to_string(n + 2) +
                              " does not refine level " + std::to_string(n + 1));
      ch[p].push_back(c);
      mass[p] += child[c].measure();
    }
    for (std::size_t p = 0; p < parent.size(); ++p)
      if (mass[p] != parent[p].measure())
        throw ValidationError("filtration block is not the union of its children");
  }
}

bool Filtration::interval_blocks() const {
  for (const auto& l : levels_)
    for (const auto& b : l.blocks())
      if (b.intervals().size() != 1) return false;
  return true;
}

std::string to_string(SystemKind kind) {
  switch (kind) {
    case SystemKind::kClassicalHaar:
      return "classical-haar";
    case SystemKind::kGeneralizedHaar:
      return "generalized-haar";
    case SystemKind::kRademacher:
      return "rademacher";
    case SystemKind::kMd:
      return "md";
    case SystemKind::kTransformed:
      return "transformed";
    case SystemKind::kCustom:
      return "custom";
  }
  return "custom";
}

SystemKind system_kind_from_string(const std::string& s) {
  for (auto k : {SystemKind::kClassicalHaar, SystemKind::kGeneralizedHaar, SystemKind::kRademacher,
                 SystemKind::kMd, SystemKind::kTransformed, SystemKind::kCustom})
    if (to_string(k) == s) return k;
  if (s == "classical") return SystemKind::kClassicalHaar;
  if (s == "generalized") return SystemKind::kGeneralizedHaar;
  throw ValidationError("unknown system kind '" + s + "'");
}

Filtration haar_filtration(const SplitTree& tree, std::size_t levels) {
  if (levels > tree.internal_nodes() + 1) throw ValidationError("split tree too shallow for filtration");
  std::vector<Partition> out;
  std::vector<std::size_t> leaves{0};  // node ids sorted by position
  auto emit = [&] {
    std::vector<SimpleSet> blocks;
    blocks.reserve(leaves.size());
    for (std::size_t id : leaves) blocks.emplace_back(std::vector<Interval>{tree.nodes()[id].interval});
    out.emplace_back(std::move(blocks));
  };
  if (levels >= 1) emit();
  for (std::size_t n = 2; n <= levels; ++n) {
    const std::size_t b = n - 2;
    auto it = std::find(leaves.begin(), leaves.end(), b);
    *it = 2 * b + 1;
    leaves.insert(std::next(it), 2 * b + 2);
    emit();
  }
  return Filtration(std::move(out));
}

OrthoSystem generalized_haar(const SplitTree& tree, std::optional<std::size_t> count,
                             std::size_t filtration_limit) {
  const std::size_t n = count.value_or(tree.internal_nodes() + 1);
  if (n < 1 || n > tree.internal_nodes() + 1)
    throw ValidationError("generalized_haar: count must be in [1, 2^depth]");
  OrthoSystem sys;
  sys.kind = SystemKind::kGeneralizedHaar;
  sys.tree = tree;
  sys.functions.resize(n);
  sys.functions[0] = PCF(RadScalar(1));
  parallel_for(n - 1, [&](std::size_t b) {
    const auto& node = tree.nodes()[b];
    const Rational& lo = node.interval.lo;
    const Rational& hi = node.interval.hi;
    const Rational& s = *node.split;
    const Rational alpha = s - lo;
    const Rational beta = hi - s;
    const Rational len = alpha + beta;
    const RadScalar c1 = RadScalar::scaled_sqrt(Rational(node.sign), beta / (alpha * len));
    const RadScalar c2 = RadScalar::scaled_sqrt(Rational(-node.sign), alpha / (beta * len));
    std::vector<Rational> br;
    std::vector<RadScalar> vals;
    if (lo > 0) {
      br.emplace_back(0);
      vals.emplace_back();
    }
    br.push_back(lo);
    vals.push_back(c1);
    br.push_back(s);
    vals.push_back(c2);
    if (hi < 1) {
      br.push_back(hi);
      vals.emplace_back();
    }
    sys.functions[b + 1] = PCF(std::move(br), std::move(vals));
  });
  if (n <= filtration_limit) sys.filtration = haar_filtration(tree, n);
  return sys;
}

OrthoSystem classical_haar(std::size_t count, std::size_t filtration_limit) {
  if (count < 1) throw ValidationError("classical_haar needs at least one function");
  int depth = 0;
  while ((std::size_t{1} << depth) < count) ++depth;
  OrthoSystem sys = generalized_haar(SplitTree::midpoint(depth), count, filtration_limit);
  sys.kind = SystemKind::kClassicalHaar;
  return sys;
}

OrthoSystem rademacher(std::size_t count, std::size_t filtration_limit) {
  if (count < 1 || count > 24) throw ValidationError("rademacher count must be in [1, 24]");
  OrthoSystem sys;
  sys.kind = SystemKind::kRademacher;
  sys.functions.resize(count);
  parallel_for(count, [&](std::size_t i) {
    const long cells = 1L << (i + 1);
    std::vector<Rational> br;
    std::vector<RadScalar> vals;
    br.reserve(static_cast<std::size_t>(cells));
    for (long c = 0; c < cells; ++c) {
      br.push_back(make_rational(c, cells));
      vals.emplace_back(c % 2 == 0 ? 1L : -1L);
    }
    sys.functions[i] = PCF(std::move(br), std::move(vals));
  });
  if (count <= filtration_limit) {
    std::vector<Partition> levels;
    for (std::size_t n = 1; n <= count; ++n) {
      const long cells = 1L << n;
      std::vector<SimpleSet> blocks;
      blocks.reserve(static_cast<std::size_t>(cells));
      for (long c = 0; c < cells; ++c)
        blocks.push_back(SimpleSet::interval(make_rational(c, cells), make_rational(c + 1, cells)));
      levels.emplace_back(std::move(blocks));
    }
    sys.filtration = Filtration(std::move(levels));
  }
  return sys;
}

OrthoSystem transform_system(const OrthoSystem& system, const PwAffineMap& tau,
                             bool pull_back_filtration) {
  OrthoSystem out;
  out.kind = SystemKind::kTransformed;
  out.normalized = system.normalized;
  out.functions.resize(system.size());
  parallel_for(system.size(), [&](std::size_t i) { out.functions[i] = pullback(system.functions[i], tau); });
  if (system.filtration) {
    if (!pull_back_filtration) {
      out.filtration = system.filtration;
    } else {
      std::vector<Partition> levels;
      for (std::size_t n = 1; n <= system.filtration->size(); ++n) {
        std::vector<SimpleSet> blocks;
        for (const auto& b : system.filtration->level(n).blocks()) blocks.push_back(tau.preimage(b));
        levels.emplace_back(std::move(blocks));
      }
      out.filtration = Filtration(std::move(levels));
    }
  }
  return out;
}

bool constant_on(const PCF& f, const SimpleSet& s, RadScalar* value) {
  const RadScalar* v = nullptr;
  const auto& br = f.breaks();
  for (const auto& iv : s.intervals()) {
    const std::size_t k = static_cast<std::size_t>(std::upper_bound(br.begin(), br.end(), iv.lo) - br.begin()) - 1;
    if (f.piece_hi(k) < iv.hi) return false;
    if (v && !(*v == f.values()[k])) return false;
    v = &f.values()[k];
  }
  if (value) *value = v ? *v : RadScalar();
  return true;
}

MdReport verify_md(const OrthoSystem& system, std::size_t gram_limit) {
  if (!system.filtration) throw ValidationError("verify_md needs a system with a filtration");
  const Filtration& filt = *system.filtration;
  const std::size_t n_funcs = system.size();
  if (filt.size() < n_funcs) throw ValidationError("filtration has fewer levels than functions");
  MdReport rep;
  std::vector<std::vector<MdViolation>> found(n_funcs);
  parallel_for(n_funcs, [&](std::size_t i) {
    const std::size_t n = i + 1;
    const PCF& f = system.functions[i];
    for (const auto& block : filt.level(n).blocks())
      if (!constant_on(f, block)) {
        found[i].push_back({n, 1, block, "not constant on a level-" + std::to_string(n) + " block"});
        break;
      }
    if (n >= 2)
      for (const auto& block : filt.level(n - 1).blocks()) {
        const RadScalar m = integrate(f, block);
        if (!m.is_zero()) {
          found[i].push_back({n, 2, block, "mean " + m.to_string() + " on a level-" +
                                               std::to_string(n - 1) + " block"});
          break;
        }
      }
  });
  const std::size_t g = std::min(n_funcs, gram_limit);
  rep.gram_size = g;
  std::vector<std::vector<MdViolation>> gram(g);
  parallel_for(g, [&](std::size_t i) {
    for (std::size_t j = i; j < g; ++j) {
      const RadScalar ip = inner(system.functions[i], system.functions[j]);
      const bool ok = i == j ? (!system.normalized || ip == RadScalar(1)) : ip.is_zero();
      if (!ok)
        gram[i].push_back({i + 1, 3, SimpleSet::unit(),
                           "<f_" + std::to_string(i + 1) + ", f_" + std::to_string(j + 1) +
                               "> = " + ip.to_string()});
    }
  });
  if (system.is_haar()) {
    const auto& leaves = filt.level(n_funcs).blocks();
    const std::size_t bound = system.tree ? static_cast<std::size_t>(system.tree->depth()) + 1 : n_funcs;
    std::vector<std::vector<MdViolation>> comp(leaves.size());
    parallel_for(leaves.size(), [&](std::size_t b) {
      std::vector<const PCF*> fns;
      std::vector<RadScalar> cs;
      for (std::size_t i = 0; i < n_funcs; ++i) {
        RadScalar c = integrate(system.functions[i], leaves[b]);
        if (c.is_zero()) continue;
        fns.push_back(&system.functions[i]);
        cs.push_back(std::move(c));
      }
      const PCF rec = linear_combination(fns, cs);
      if (!(rec == PCF::indicator(leaves[b])) || cs.size() > bound)
        comp[b].push_back({0, 4, leaves[b],
                           "leaf indicator not reconstructed from " + std::to_string(cs.size()) +
                               " coefficients"});
    });
    rep.complete_ok = true;
    for (auto& v : comp)
      for (auto& x : v) {
        rep.complete_ok = false;
        rep.violations.push_back(std::move(x));
      }
  }
  for (auto& v : found)
    for (auto& x : v) {
      (x.condition == 1 ? rep.constant_ok : rep.mean_zero_ok) = false;
      rep.violations.push_back(std::move(x));
    }
  for (auto& v : gram)
    for (auto& x : v) {
      rep.orthonormal_ok = false;
      rep.violations.push_back(std::move(x));
    }
  return rep;
}

Expansion expand(const PCF& f, const OrthoSystem& system, std::size_t upto) {
  if (upto > system.size()) throw ValidationError("expand: system has fewer functions than requested");
  Expansion e;
  e.coefficients.resize(upto);
  parallel_for(upto, [&](std::size_t i) { e.coefficients[i] = inner(f, system.functions[i]); });
  std::vector<const PCF*> fns;
  RadScalar energy;
  for (std::size_t i = 0; i < upto; ++i) {
    fns.push_back(&system.functions[i]);
    energy += e.coefficients[i].square();
  }
  e.reconstruction = linear_combination(fns, e.coefficients);
  e.residual = l2_norm_sq(f) - energy;
  return e;
}

NonOverlapFamily::NonOverlapFamily(std::vector<std::vector<std::size_t>> sets,
                                   std::vector<std::vector<RadScalar>> coeffs)
    : NonOverlapFamily(unchecked(std::move(sets), std::move(coeffs))) {
  std::set<std::size_t> seen;
  for (const auto& s : sets_)
    for (std::size_t j : s)
      if (!seen.insert(j).second)
        throw ValidationError("index " + std::to_string(j) + " appears in two polynomials");
}

NonOverlapFamily NonOverlapFamily::unchecked(std::vector<std::vector<std::size_t>> sets,
                                             std::vector<std::vector<RadScalar>> coeffs) {
  if (sets.size() != coeffs.size()) throw ValidationError("one coefficient list per index set");
  for (std::size_t k = 0; k < sets.size(); ++k) {
    if (sets[k].size() != coeffs[k].size()) throw ValidationError("one coefficient per index");
    for (std::size_t j : sets[k])
      if (j == 0) throw ValidationError("system indices are 1-based");
  }
  NonOverlapFamily f;
  f.sets_ = std::move(sets);
  f.coeffs_ = std::move(coeffs);
  return f;
}

NonOverlapFamily NonOverlapFamily::windows(const std::vector<std::size_t>& bounds,
                                           const std::vector<RadScalar>& coeffs) {
  std::vector<std::vector<std::size_t>> sets;
  std::vector<std::vector<RadScalar>> cs;
  for (std::size_t k = 0; k + 1 < bounds.size(); ++k) {
    if (bounds[k + 1] <= bounds[k]) throw ValidationError("window bounds must increase");
    if (bounds[k + 1] > coeffs.size()) throw ValidationError("window exceeds coefficient list");
    std::vector<std::size_t> s;
    std::vector<RadScalar> c;
    for (std::size_t j = bounds[k] + 1; j <= bounds[k + 1]; ++j) {
      s.push_back(j);
      c.push_back(coeffs[j - 1]);
    }
    sets.push_back(std::move(s));
    cs.push_back(std::move(c));
  }
  return NonOverlapFamily(std::move(sets), std::move(cs));
}

PCF NonOverlapFamily::polynomial(std::size_t k, const OrthoSystem& system) const {
  std::vector<const PCF*> fns;
  for (std::size_t j : sets_.at(k)) fns.push_back(&system.at(j));
  return linear_combination(fns, coeffs_.at(k));
}

RadScalar NonOverlapFamily::norm_sq(std::size_t k) const {
  RadScalar s;
  for (const auto& c : coeffs_.at(k)) s += c.square();
  return s;
}

QuadrupleReport quadruple_check(const NonOverlapFamily& family, const OrthoSystem& system,
                                std::size_t trials, std::uint64_t seed) {
  if (family.size() < 4) throw ValidationError("quadruple_check needs at least four polynomials");
  std::vector<PCF> polys(family.size());
  parallel_for(family.size(), [&](std::size_t k) { polys[k] = family.polynomial(k, system); });
  std::mt19937_64 rng(seed);
  std::vector<std::array<std::size_t, 4>> picks(trials);
  for (auto& q : picks) {
    std::vector<std::size_t> idx(family.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    for (std::size_t i = 0; i < 4; ++i) {
      std::uniform_int_distribution<std::size_t> d(i, idx.size() - 1);
      std::swap(idx[i], idx[d(rng)]);
      q[i] = idx[i];
    }
  }
  std::vector<RadScalar> vals(trials);
  parallel_for(trials, [&](std::size_t t) {
    const auto& q = picks[t];
    vals[t] = integrate(polys[q[0]] * polys[q[1]] * polys[q[2]] * polys[q[3]]);
  });
  QuadrupleReport rep;
  rep.trials = trials;
  for (std::size_t t = 0; t < trials; ++t) {
    if (vals[t].is_zero()) continue;
    ++rep.nonzero;
    QuadrupleHit h{{picks[t][0] + 1, picks[t][1] + 1, picks[t][2] + 1, picks[t][3] + 1}, vals[t]};
    rep.hits.push_back(std::move(h));
  }
  return rep;
}

Json to_json(const OrthoSystem& system) {
  Json j;
  j["kind"] = to_string(system.kind);
  j["indexing"] = "f_1 = 1 for Haar kinds, then breadth-first (level, position); 1-based";
  j["count"] = system.size();
  j["normalized"] = system.normalized;
  if (system.tree) {
    Json splits = Json::array();
    Json signs = Json::array();
    for (std::size_t b = 0; b < system.tree->internal_nodes(); ++b) {
      splits.push_back(to_json(*system.tree->nodes()[b].split));
      signs.push_back(system.tree->nodes()[b].sign);
    }
    j["tree"] = Json{{"depth", system.tree->depth()}, {"splits", splits}, {"signs", signs}};
  }
  Json fns = Json::array();
  for (const auto& f : system.functions) fns.push_back(to_json(f));
  j["functions"] = fns;
  return j;
}

OrthoSystem ortho_system_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("kind")) throw ValidationError("system JSON needs 'kind'");
  const SystemKind kind = system_kind_from_string(j.at("kind").get<std::string>());
  const std::size_t count = j.value("count", std::size_t{0});
  OrthoSystem sys;
  if ((kind == SystemKind::kClassicalHaar || kind == SystemKind::kGeneralizedHaar) && j.contains("tree")) {
    const auto& t = j.at("tree");
    std::vector<Rational> splits;
    for (const auto& s : t.at("splits")) splits.push_back(rational_from_json(s));
    SplitTree tree = SplitTree::from_splits(t.at("depth").get<int>(), splits);
    if (t.contains("signs")) tree = tree.with_signs(t.at("signs").get<std::vector<int>>());
    sys = generalized_haar(tree, count ? std::optional<std::size_t>(count) : std::nullopt);
    sys.kind = kind;
  } else if (kind == SystemKind::kRademacher && count > 0) {
    sys = rademacher(count);
  } else {
    if (!j.contains("functions")) throw ValidationError("system JSON needs 'functions'");
    sys.kind = kind;
    for (const auto& f : j.at("functions")) sys.functions.push_back(pcf_from_json(f));
    sys.normalized = j.value("normalized", true);
    return sys;
  }
  if (j.contains("functions")) {
    const auto& fns = j.at("functions");
    if (fns.size() != sys.size()) throw ValidationError("function count does not match 'count'");
    for (std::size_t i = 0; i < fns.size(); ++i)
      if (!(pcf_from_json(fns[i]) == sys.functions[i]))
        throw ValidationError("function " + std::to_string(i + 1) + " does not match the tree");
  }
  return sys;
}

}  // namespace mdlab
