// Copyright 2026 The mdlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "mdlab/kappa_search.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <random>

#include "mdlab/digest.hpp"
#include "mdlab/lemma1.hpp"
#include "mdlab/parallel.hpp"

namespace mdlab {

namespace {

double norm_sq(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s;
}

void normalize(std::vector<double>& x) {
  const double n = std::sqrt(norm_sq(x));
  if (n > 0.0)
    for (double& v : x) v /= n;
}

double dot(const std::vector<double>& x, const std::vector<double>& y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

std::vector<double> ones(std::size_t n) {
  std::vector<double> x(n, 1.0);
  normalize(x);
  return x;
}

std::vector<double> gaussian(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d;
  std::vector<double> x(n);
  for (double& v : x) v = d(rng);
  normalize(x);
  return x;
}

std::string format17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string to_string(CertificateKind kind) {
  switch (kind) {
    case CertificateKind::kExact: return "exact";
    case CertificateKind::kLocalMax: return "local-max";
    case CertificateKind::kLowerBound: return "lower-bound";
  }
  return "unknown";
}

namespace {

CertificateKind certificate_kind_from_string(const std::string& s) {
  if (s == "exact") return CertificateKind::kExact;
  if (s == "local-max") return CertificateKind::kLocalMax;
  if (s == "lower-bound") return CertificateKind::kLowerBound;
  throw ValidationError("unknown certificate kind '" + s + "'");
}

}  // namespace

MonotoneFamily KappaEstimate::witness() const {
  if (coefficients.size() != structure.size())
    throw ValidationError("certificate has " + std::to_string(coefficients.size()) +
                          " coefficients for " + std::to_string(structure.size()) + " positions");
  std::vector<RadScalar> c;
  c.reserve(coefficients.size());
  for (double v : coefficients) c.emplace_back(rational_from_double(v));
  return MonotoneFamily(structure, std::move(c));
}

Json to_json(const KappaEstimate& e) {
  Json exact = Json::array();
  for (double v : e.coefficients) exact.push_back(to_json(rational_from_double(v)));
  Json j{{"value", e.value},
         {"kind", to_string(e.kind)},
         {"system", e.system},
         {"n", e.structure.n},
         {"structure", to_json(e.structure)},
         {"coefficients", e.coefficients},
         {"coefficients_exact", exact}};
  j["sigma"] = e.sigma ? Json(*e.sigma) : Json(nullptr);
  j["flagged"] = e.flagged;
  j["note"] = e.note;
  j["evaluations"] = e.evaluations;
  j["reevaluation_hash"] = reevaluation_hash(e);
  return j;
}

KappaEstimate kappa_estimate_from_json(const Json& j) {
  try {
    KappaEstimate e;
    e.value = j.at("value").get<double>();
    e.kind = certificate_kind_from_string(j.at("kind").get<std::string>());
    e.system = j.value("system", std::string());
    e.structure = family_structure_from_json(j.at("structure"));
    if (j.contains("coefficients_exact")) {
      for (const auto& c : j.at("coefficients_exact")) e.coefficients.push_back(to_double(rational_from_json(c)));
    } else {
      e.coefficients = j.at("coefficients").get<std::vector<double>>();
    }
    if (j.contains("sigma") && !j.at("sigma").is_null())
      e.sigma = j.at("sigma").get<std::vector<std::size_t>>();
    e.flagged = j.value("flagged", false);
    e.note = j.value("note", std::string());
    e.evaluations = j.value("evaluations", std::size_t{0});
    if (e.coefficients.size() != e.structure.size())
      throw ValidationError("coefficient count does not match the structure");
    return e;
  } catch (const Json::exception& ex) {
    throw ValidationError(std::string("malformed kappa certificate: ") + ex.what());
  }
}

std::string reevaluation_hash(const KappaEstimate& e) {
  Json exact = Json::array();
  for (double v : e.coefficients) exact.push_back(to_json(rational_from_double(v)));
  const Json j{{"structure", to_json(e.structure)}, {"coefficients", exact}, {"value", format17(e.value)}};
  return sha256_hex(j.dump());
}

// ---------------------------------------------------------------------------

SystemGrid::SystemGrid(const OrthoSystem& system, std::size_t n) : count(n) {
  if (n > system.size()) throw ValidationError("system has fewer than " + std::to_string(n) + " functions");
  std::vector<const PCF*> fns;
  for (std::size_t k = 1; k <= n; ++k) fns.push_back(&system.at(k));
  const AtomGrid g = build_atom_grid(fns);
  offsets.push_back(0);
  for (std::size_t a = 0; a < g.atoms(); ++a) {
    weights.push_back(to_double(g.lengths[a]));
    for (std::size_t e = g.offsets[a]; e < g.offsets[a + 1]; ++e) {
      index.push_back(g.slots[e] + 1);
      value.push_back(g.values[e].approx());
    }
    offsets.push_back(index.size());
  }
}

FloatGrid::FloatGrid(const FamilyStructure& structure, const OrthoSystem& system)
    : FloatGrid(structure, SystemGrid(system, structure.indices.empty()
                                                  ? 0
                                                  : *std::max_element(structure.indices.begin(),
                                                                      structure.indices.end()))) {}

FloatGrid::FloatGrid(const FamilyStructure& s, const SystemGrid& base) : dims_(s.size()) {
  std::vector<long> pos_of(base.count + 1, -1);
  for (std::size_t q = 0; q < s.size(); ++q) {
    if (s.indices[q] > base.count) throw ValidationError("structure index beyond the grid");
    pos_of[s.indices[q]] = static_cast<long>(q);
  }
  offsets_.push_back(0);
  std::vector<std::pair<std::uint32_t, double>> entries;
  for (std::size_t a = 0; a + 1 < base.offsets.size(); ++a) {
    entries.clear();
    for (std::size_t e = base.offsets[a]; e < base.offsets[a + 1]; ++e)
      if (const long p = pos_of[base.index[e]]; p >= 0)
        entries.emplace_back(static_cast<std::uint32_t>(p), base.value[e]);
    if (entries.empty()) continue;
    std::sort(entries.begin(), entries.end());
    std::vector<std::uint32_t> ends;
    for (std::size_t e = 0; e < entries.size(); ++e) {
      pos_.push_back(entries[e].first);
      val_.push_back(entries[e].second);
      if (e + 1 == entries.size() || s.steps[entries[e + 1].first] != s.steps[entries[e].first])
        ends.push_back(static_cast<std::uint32_t>(e + 1));
    }
    weights_.push_back(base.weights[a]);
    ends_.push_back(std::move(ends));
    offsets_.push_back(pos_.size());
  }
}

double FloatGrid::objective(const std::vector<double>& c, Pattern* pattern) const {
  const double cn = norm_sq(c);
  if (pattern) pattern->assign(atoms(), 0);
  if (cn <= 0.0) return 0.0;
  double total = 0.0;
  for (std::size_t a = 0; a < atoms(); ++a) {
    const std::size_t base = offsets_[a];
    double s = 0.0;
    double best = -1.0;
    std::uint32_t arg = 0;
    std::uint32_t e = 0;
    for (std::uint32_t end : ends_[a]) {
      for (; e < end; ++e) s += c[pos_[base + e]] * val_[base + e];
      if (std::fabs(s) >= best) {
        best = std::fabs(s);
        arg = end;
      }
    }
    if (pattern) (*pattern)[a] = arg;
    total += weights_[a] * best * best;
  }
  return total / cn;
}

std::vector<double> FloatGrid::form(const Pattern& pattern) const {
  std::vector<double> q(dims_ * dims_, 0.0);
  for (std::size_t a = 0; a < atoms(); ++a) {
    const std::size_t base = offsets_[a];
    for (std::uint32_t i = 0; i < pattern[a]; ++i)
      for (std::uint32_t j = 0; j < pattern[a]; ++j)
        q[pos_[base + i] * dims_ + pos_[base + j]] += weights_[a] * val_[base + i] * val_[base + j];
  }
  return q;
}

void FloatGrid::apply(const Pattern& pattern, const std::vector<double>& x, std::vector<double>& y) const {
  y.assign(dims_, 0.0);
  for (std::size_t a = 0; a < atoms(); ++a) {
    const std::size_t base = offsets_[a];
    double s = 0.0;
    for (std::uint32_t i = 0; i < pattern[a]; ++i) s += x[pos_[base + i]] * val_[base + i];
    s *= weights_[a];
    for (std::uint32_t i = 0; i < pattern[a]; ++i) y[pos_[base + i]] += s * val_[base + i];
  }
}

Eigenpair top_eigenpair(const FloatGrid& grid, const FloatGrid::Pattern& pattern,
                        const std::vector<double>& warm, std::size_t dense_limit) {
  const std::size_t d = grid.dims();
  Eigenpair out;
  if (d == 0) return out;
  if (d <= dense_limit) {
    const std::vector<double> q = grid.form(pattern);
    const Eigen::Map<const Eigen::MatrixXd> m(q.data(), static_cast<Eigen::Index>(d),
                                              static_cast<Eigen::Index>(d));
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    if (es.info() != Eigen::Success) throw PrecisionError("symmetric eigensolver did not converge");
    const Eigen::Index top = static_cast<Eigen::Index>(d) - 1;
    out.value = es.eigenvalues()(top);
    out.vector.assign(es.eigenvectors().col(top).data(), es.eigenvectors().col(top).data() + d);
  } else {
    std::vector<double> x = warm.size() == d && norm_sq(warm) > 0.0 ? warm : ones(d);
    normalize(x);
    std::vector<double> y;
    for (int it = 0; it < 20000; ++it) {
      grid.apply(pattern, x, y);
      const double lambda = dot(x, y);
      double r = 0.0;
      for (std::size_t i = 0; i < d; ++i) r += (y[i] - lambda * x[i]) * (y[i] - lambda * x[i]);
      out.value = lambda;
      if (std::sqrt(r) <= 1e-11 * std::max(1.0, lambda)) break;
      x = y;
      normalize(x);
    }
    out.vector = x;
  }
  // Orient along the warm start, else make the largest entry positive.
  double orient = warm.size() == d ? dot(out.vector, warm) : 0.0;
  if (orient == 0.0) {
    std::size_t arg = 0;
    for (std::size_t i = 1; i < d; ++i)
      if (std::fabs(out.vector[i]) > std::fabs(out.vector[arg])) arg = i;
    orient = out.vector[arg];
  }
  if (orient < 0.0)
    for (double& v : out.vector) v = -v;
  std::vector<double> y;
  grid.apply(pattern, out.vector, y);
  double r = 0.0;
  for (std::size_t i = 0; i < d; ++i) r += (y[i] - out.value * out.vector[i]) * (y[i] - out.value * out.vector[i]);
  out.residual = std::sqrt(r);
  return out;
}

// ---------------------------------------------------------------------------

KappaEstimate exact_kappa(const FamilyStructure& structure, const OrthoSystem& system,
                          const ExactKappaOptions& options) {
  if (structure.size() == 0) throw ValidationError("empty family structure");
  const FloatGrid grid(structure, system);
  const std::size_t d = grid.dims();
  const auto& ends = grid.group_ends();

  std::vector<std::size_t> free_atoms;
  double bits = 0.0;
  for (std::size_t a = 0; a < grid.atoms(); ++a)
    if (ends[a].size() > 1) {
      free_atoms.push_back(a);
      bits += std::log2(static_cast<double>(ends[a].size()));
    }
  if (bits > options.budget_bits) {
    char msg[128];
    std::snprintf(msg, sizeof msg, "exact kappa needs 2^%.1f selection patterns, budget is 2^%g", bits,
                  options.budget_bits);
    throw BudgetError(msg);
  }
  std::uint64_t total = 1;
  for (std::size_t a : free_atoms) total *= ends[a].size();

  // Per-atom contribution w v v^T of a prefix, as a dense matrix.
  auto add_prefix = [&](Eigen::MatrixXd& q, std::size_t a, std::uint32_t len, double sign) {
    FloatGrid::Pattern p(grid.atoms(), 0);
    p[a] = len;
    const std::vector<double> f = grid.form(p);
    q += sign * Eigen::Map<const Eigen::MatrixXd>(f.data(), static_cast<Eigen::Index>(d),
                                                  static_cast<Eigen::Index>(d));
  };
  FloatGrid::Pattern fixed(grid.atoms(), 0);
  for (std::size_t a = 0; a < grid.atoms(); ++a)
    if (ends[a].size() == 1) fixed[a] = ends[a][0];
  const std::vector<double> fixed_form = grid.form(fixed);

  constexpr std::uint64_t kChunk = 1024;
  const std::uint64_t chunks = (total + kChunk - 1) / kChunk;
  std::vector<std::pair<double, std::uint64_t>> best(chunks, {-1.0, 0});
  parallel_for(chunks, [&](std::size_t ci) {
    const std::uint64_t lo = ci * kChunk;
    const std::uint64_t hi = std::min(total, lo + kChunk);
    std::vector<std::size_t> digit(free_atoms.size());
    std::uint64_t rem = lo;
    for (std::size_t k = 0; k < free_atoms.size(); ++k) {
      digit[k] = rem % ends[free_atoms[k]].size();
      rem /= ends[free_atoms[k]].size();
    }
    Eigen::MatrixXd q = Eigen::Map<const Eigen::MatrixXd>(fixed_form.data(), static_cast<Eigen::Index>(d),
                                                          static_cast<Eigen::Index>(d));
    for (std::size_t k = 0; k < free_atoms.size(); ++k)
      add_prefix(q, free_atoms[k], ends[free_atoms[k]][digit[k]], 1.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    for (std::uint64_t idx = lo; idx < hi; ++idx) {
      es.compute(q, Eigen::EigenvaluesOnly);
      const double v = es.eigenvalues()(static_cast<Eigen::Index>(d) - 1);
      if (v > best[ci].first) best[ci] = {v, idx};
      if (idx + 1 == hi) break;
      for (std::size_t k = 0; k < free_atoms.size(); ++k) {
        const std::size_t a = free_atoms[k];
        add_prefix(q, a, ends[a][digit[k]], -1.0);
        digit[k] = (digit[k] + 1) % ends[a].size();
        add_prefix(q, a, ends[a][digit[k]], 1.0);
        if (digit[k] != 0) break;
      }
    }
  });
  std::pair<double, std::uint64_t> top = best[0];
  for (const auto& b : best)
    if (b.first > top.first) top = b;

  FloatGrid::Pattern pattern = fixed;
  std::uint64_t rem = top.second;
  for (std::size_t a : free_atoms) {
    pattern[a] = ends[a][rem % ends[a].size()];
    rem /= ends[a].size();
  }
  const Eigenpair eig = top_eigenpair(grid, pattern, {}, std::numeric_limits<std::size_t>::max());
  KappaEstimate e;
  e.coefficients = eig.vector;
  e.value = std::sqrt(std::max(eig.value, grid.objective(e.coefficients)));
  e.structure = structure;
  e.kind = CertificateKind::kExact;
  e.system = to_string(system.kind);
  e.evaluations = total;
  return e;
}

// ---------------------------------------------------------------------------

namespace {

struct RunResult {
  double objective = 0.0;
  std::vector<double> c;
  std::size_t steps = 0;
};

RunResult run_alt_max(const FloatGrid& grid, std::vector<double> c, int max_iterations,
                      std::vector<double>* trace) {
  normalize(c);
  FloatGrid::Pattern pat;
  double obj = grid.objective(c, &pat);
  if (trace) trace->push_back(obj);
  RunResult r;
  for (int it = 0; it < max_iterations; ++it) {
    ++r.steps;
    const Eigenpair eig = top_eigenpair(grid, pat, c);
    FloatGrid::Pattern next;
    const double val = grid.objective(eig.vector, &next);
    if (!(val > obj)) break;
    c = eig.vector;
    obj = val;
    if (trace) trace->push_back(obj);
    if (next == pat) break;
    pat = std::move(next);
  }
  r.objective = obj;
  r.c = std::move(c);
  return r;
}

}  // namespace

KappaEstimate alt_max_kappa(const FamilyStructure& structure, const FloatGrid& grid,
                            const AltMaxOptions& options) {
  const std::size_t d = grid.dims();
  if (d == 0) throw ValidationError("empty family structure");
  std::vector<std::vector<double>> starts;
  std::size_t trace_slot = 0;
  if (options.initial) {
    if (options.initial->size() != d) throw ValidationError("initial vector has the wrong dimension");
    if (norm_sq(*options.initial) > 0.0) {
      starts.push_back(*options.initial);
      trace_slot = 1;
    }
  }
  for (int r = 0; r < std::max(1, options.restarts); ++r)
    starts.push_back(r == 0 ? ones(d) : gaussian(d, stream_seed(options.seed, static_cast<std::uint64_t>(r))));
  std::vector<RunResult> runs(starts.size());
  parallel_for(starts.size(), [&](std::size_t i) {
    runs[i] = run_alt_max(grid, starts[i], options.max_iterations, i == trace_slot ? options.trace : nullptr);
  });
  std::size_t arg = 0;
  KappaEstimate e;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    if (runs[i].objective > runs[arg].objective) arg = i;
    e.evaluations += runs[i].steps;
  }
  e.coefficients = runs[arg].c;
  e.value = std::sqrt(runs[arg].objective);
  e.structure = structure;
  e.kind = CertificateKind::kLocalMax;
  return e;
}

KappaEstimate alt_max_kappa(const FamilyStructure& structure, const OrthoSystem& system,
                            const AltMaxOptions& options) {
  const FloatGrid grid(structure, system);
  KappaEstimate e = alt_max_kappa(structure, grid, options);
  e.system = to_string(system.kind);
  return e;
}

// ---------------------------------------------------------------------------

NuStrategy nu_strategy_from_string(const std::string& s) {
  if (s == "exhaustive") return NuStrategy::kExhaustive;
  if (s == "random") return NuStrategy::kRandom;
  if (s == "anneal") return NuStrategy::kAnneal;
  throw ValidationError("unknown search strategy '" + s + "' (exhaustive, random, anneal)");
}

namespace {

struct Candidate {
  double value = 0.0;
  std::vector<std::size_t> sigma;
  std::vector<double> coeffs;  // by structure position
  std::size_t found_at = 0;
};

class NuEvaluator {
 public:
  NuEvaluator(std::size_t n, int restarts)
      : n_(n), restarts_(restarts), system_(classical_haar(n, 0)), base_(system_, n) {}

  const OrthoSystem& system() const { return system_; }

  // `by_index[j]` is a start coefficient for system index j (0 unused).
  Candidate evaluate(const std::vector<std::size_t>& sigma, const std::vector<double>* by_index,
                     std::uint64_t seed) const {
    const FamilyStructure s = FamilyStructure::from_order(sigma);
    const FloatGrid grid(s, base_);
    AltMaxOptions o;
    o.restarts = restarts_;
    o.seed = seed;
    if (by_index) {
      std::vector<double> init(s.size());
      for (std::size_t q = 0; q < s.size(); ++q) init[q] = (*by_index)[s.indices[q]];
      o.initial = std::move(init);
    }
    const KappaEstimate e = alt_max_kappa(s, grid, o);
    return Candidate{e.value, sigma, e.coefficients, 0};
  }

  std::vector<double> by_index(const Candidate& c) const {
    const FamilyStructure s = FamilyStructure::from_order(c.sigma);
    std::vector<double> out(n_ + 1, 0.0);
    for (std::size_t q = 0; q < s.size(); ++q) out[s.indices[q]] = c.coeffs[q];
    return out;
  }

 private:
  std::size_t n_;
  int restarts_;
  OrthoSystem system_;
  SystemGrid base_;
};

std::optional<Candidate> warm_candidate(std::size_t n, const NuOptions& o) {
  if (!o.warm_start) return std::nullopt;
  const KappaEstimate& w = *o.warm_start;
  if (!w.sigma) throw ValidationError("warm start certificate has no permutation");
  if (w.sigma->size() > n) throw ValidationError("warm start is larger than n");
  std::vector<char> used(n + 1, 0);
  Candidate c;
  c.sigma = *w.sigma;
  for (std::size_t j : c.sigma) {
    if (j == 0 || j > n || used[j]) throw ValidationError("warm start permutation is invalid");
    used[j] = 1;
  }
  for (std::size_t j = 1; j <= n; ++j)
    if (!used[j]) c.sigma.push_back(j);
  std::vector<double> by_index(n + 1, 0.0);
  for (std::size_t q = 0; q < w.structure.size(); ++q) by_index[w.structure.indices[q]] = w.coefficients[q];
  const FamilyStructure s = FamilyStructure::from_order(c.sigma);
  c.coeffs.resize(s.size());
  for (std::size_t q = 0; q < s.size(); ++q) c.coeffs[q] = by_index[s.indices[q]];
  c.value = w.value;
  return c;
}

std::vector<std::size_t> random_permutation(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), 1);
  std::mt19937_64 rng(seed);
  for (std::size_t i = n; i > 1; --i)
    std::swap(p[i - 1], p[std::uniform_int_distribution<std::size_t>(0, i - 1)(rng)]);
  return p;
}

bool better(const Candidate& a, const Candidate& b) { return a.value > b.value; }

}  // namespace

KappaEstimate nu_search(std::size_t n, const NuOptions& options) {
  if (n == 0) throw ValidationError("n must be at least 1");
  const NuEvaluator ev(n, options.restarts);
  const std::optional<Candidate> warm = warm_candidate(n, options);
  const std::vector<double> warm_by_index = warm ? ev.by_index(*warm) : std::vector<double>();
  const std::vector<double>* warm_ptr = warm ? &warm_by_index : nullptr;

  Candidate best;
  std::size_t evaluations = 0;
  bool late_improvement = false;

  switch (options.strategy) {
    case NuStrategy::kExhaustive: {
      if (n > 8) throw ValidationError("exhaustive permutation search is limited to n <= 8");
      std::vector<std::vector<std::size_t>> perms;
      std::vector<std::size_t> p(n);
      std::iota(p.begin(), p.end(), 1);
      do perms.push_back(p);
      while (std::next_permutation(p.begin(), p.end()));
      std::vector<Candidate> out(perms.size());
      parallel_for(perms.size(), [&](std::size_t i) { out[i] = ev.evaluate(perms[i], warm_ptr, stream_seed(options.seed, i)); });
      best = out[0];
      for (const auto& c : out)
        if (better(c, best)) best = c;
      evaluations = perms.size();
      break;
    }
    case NuStrategy::kRandom: {
      const std::size_t budget = std::max<std::size_t>(1, options.budget);
      std::vector<Candidate> out(budget);
      parallel_for(budget, [&](std::size_t i) {
        const auto sigma = (i == 0 && warm) ? warm->sigma : random_permutation(n, stream_seed(options.seed, i));
        out[i] = ev.evaluate(sigma, warm_ptr, stream_seed(options.seed ^ 0x5bd1e995ULL, i));
        out[i].found_at = i;
      });
      best = out[0];
      for (const auto& c : out)
        if (better(c, best)) best = c;
      evaluations = budget;
      late_improvement = best.found_at * 10 >= budget * 9 && budget >= 10;
      break;
    }
    case NuStrategy::kAnneal: {
      constexpr std::size_t kChains = 4;
      const std::size_t per_chain = std::max<std::size_t>(1, options.budget / kChains);
      std::vector<Candidate> chain_best(kChains);
      parallel_for(kChains, [&](std::size_t ch) {
        std::mt19937_64 rng(stream_seed(options.seed, 1000 + ch));
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        std::uniform_int_distribution<std::size_t> pick(0, n - 1);
        std::vector<std::size_t> start = warm ? warm->sigma : random_permutation(n, rng());
        if (!warm && ch == 0) std::iota(start.begin(), start.end(), 1);
        Candidate cur = ev.evaluate(start, warm_ptr, rng());
        Candidate top = cur;
        constexpr double kT0 = 0.05;
        constexpr double kT1 = 1e-4;
        for (std::size_t it = 1; it < per_chain; ++it) {
          const double t = kT0 * std::pow(kT1 / kT0, static_cast<double>(it) / static_cast<double>(per_chain));
          std::vector<std::size_t> sigma = cur.sigma;
          if (n > 1) {
            const std::size_t i = pick(rng);
            std::size_t j = pick(rng);
            if (j == i) j = (i + 1) % n;
            if (unit(rng) < 0.5) {
              std::swap(sigma[i], sigma[j]);
            } else {
              const std::size_t v = sigma[i];
              sigma.erase(sigma.begin() + static_cast<long>(i));
              sigma.insert(sigma.begin() + static_cast<long>(j), v);
            }
          }
          const std::vector<double> init = ev.by_index(cur);
          Candidate next = ev.evaluate(sigma, &init, rng());
          next.found_at = it;
          if (next.value >= cur.value || unit(rng) < std::exp((next.value - cur.value) / t)) cur = next;
          if (better(cur, top)) top = cur;
        }
        chain_best[ch] = top;
      });
      best = chain_best[0];
      for (const auto& c : chain_best)
        if (better(c, best)) best = c;
      evaluations = per_chain * kChains;
      late_improvement = best.found_at * 10 >= per_chain * 9 && per_chain >= 10;
      break;
    }
  }
  if (warm && warm->value > best.value) best = *warm;

  KappaEstimate e;
  e.structure = FamilyStructure::from_order(best.sigma);
  e.coefficients = best.coeffs;
  normalize(e.coefficients);
  const FloatGrid grid(e.structure, ev.system());
  e.value = std::sqrt(grid.objective(e.coefficients));
  e.kind = CertificateKind::kLowerBound;
  e.sigma = best.sigma;
  e.system = to_string(SystemKind::kClassicalHaar);
  e.evaluations = evaluations;
  if (late_improvement) {
    e.flagged = true;
    e.note = "budget exhausted while the search was still improving";
  }
  return e;
}

// ---------------------------------------------------------------------------

GrowthFit growth_fit(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 3) throw ValidationError("growth fit needs at least 3 points");
  bool distinct = false;
  for (const auto& [n, k] : points) {
    if (!(n >= 1.0)) throw ValidationError("growth fit needs n >= 1");
    if (n != points.front().first) distinct = true;
  }
  if (!distinct) throw ValidationError("growth fit needs at least two distinct n");
  GrowthFit out;
  const char* names[] = {"constant", "sqrt-log", "log"};
  for (int m = 0; m < 3; ++m) {
    double sgg = 0.0;
    double sgk = 0.0;
    std::vector<double> g;
    for (const auto& [n, k] : points) {
      const double l = std::log2(n + 1.0);
      const double v = m == 0 ? 1.0 : (m == 1 ? std::sqrt(l) : l);
      g.push_back(v);
      sgg += v * v;
      sgk += v * k;
    }
    ModelFit f;
    f.name = names[m];
    f.coefficient = sgk / sgg;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const double r = points[i].second - f.coefficient * g[i];
      f.ssr += r * r;
    }
    out.models.push_back(f);
  }
  std::vector<std::size_t> order = {0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double x = out.models[a].ssr;
    const double y = out.models[b].ssr;
    return x < y - 1e-12 * std::max({1.0, x, y});
  });
  for (std::size_t i : order) out.ranking.push_back(out.models[i].name);
  out.best = out.ranking.front();
  return out;
}

// ---------------------------------------------------------------------------

TransferResult transfer_kappa_lower(const OrthoSystem& target, const KappaEstimate& haar_certificate,
                                    const Rational& eps, const std::vector<long>& n_schedule) {
  const FamilyStructure& hs = haar_certificate.structure;
  if (hs.size() == 0) throw ValidationError("certificate has an empty structure");
  if (haar_certificate.coefficients.size() != hs.size())
    throw ValidationError("certificate coefficients do not match its structure");
  TransferResult out;
  out.direct = haar_certificate.value;
  out.delta_bound = 2.0 * to_double(eps) * static_cast<double>(hs.n);
  out.estimate.kind = CertificateKind::kLowerBound;
  out.estimate.system = to_string(target.kind);
  const std::size_t steps = *std::max_element(hs.indices.begin(), hs.indices.end());
  Lemma1Result run;
  try {
    const OrthoSystem haar = classical_haar(steps);
    run = lemma1_run(haar, target, std::vector<Rational>(steps, eps), steps, n_schedule);
  } catch (const BudgetError& ex) {
    out.estimate.flagged = true;
    out.estimate.value = 1.0;
    out.estimate.note = std::string("construction failed: ") + ex.what();
    return out;
  }

  std::vector<std::size_t> indices;
  std::vector<std::size_t> stepv;
  std::vector<RadScalar> exact;
  for (std::size_t q = 0; q < hs.size(); ++q) {
    const std::size_t j = hs.indices[q];
    const Rational a = rational_from_double(haar_certificate.coefficients[q]);
    const auto [m, r] = run.state.windows[j - 1];
    const auto& c = run.state.poly_coeffs[j - 1];
    for (std::size_t i = m + 1; i <= r; ++i) {
      if (c[i - m - 1].is_zero()) continue;
      indices.push_back(i);
      stepv.push_back(hs.steps[q]);
      exact.push_back(c[i - m - 1] * a);
    }
  }
  if (exact.empty()) {
    out.estimate.flagged = true;
    out.estimate.note = "transferred family vanishes";
    return out;
  }
  std::vector<double> order(exact.size());
  std::iota(order.begin(), order.end(), 0.0);
  const FamilyStructure s = FamilyStructure::make(hs.n, indices, stepv, &order);
  std::vector<RadScalar> sorted;
  std::vector<double> floats;
  for (double o : order) {
    sorted.push_back(exact[static_cast<std::size_t>(o)]);
    floats.push_back(sorted.back().approx());
  }
  const MonotoneFamily family(s, sorted);
  const KappaRatio kr = kappa_ratio(family, target);
  out.transferred = kr.ratio;
  out.certified = kr.ratio.value - kr.ratio.error >= out.direct - out.delta_bound;
  normalize(floats);
  out.estimate.structure = s;
  out.estimate.coefficients = floats;
  out.estimate.value = kr.ratio.value;
  out.estimate.evaluations = steps;
  if (!out.certified) {
    out.estimate.flagged = true;
    out.estimate.note = "transferred ratio below direct certificate minus 2 eps n";
  }
  return out;
}

}  // namespace mdlab
