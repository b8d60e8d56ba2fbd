// Copyright 2026 The mdlab Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdio>
#include <filesystem>
#include <memory>
#include <random>
#include <sstream>

#include "cli_internal.hpp"
#include "mdlab/convergence.hpp"
#include "mdlab/errors.hpp"
#include "mdlab/kappa_search.hpp"
#include "mdlab/lemma1.hpp"
#include "mdlab/operators.hpp"

namespace mdlab::cli {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CommandOutput single(const std::string& name, std::string content, Json results = Json::array()) {
  CommandOutput o;
  o.artifacts.push_back(Artifact{name, std::move(content)});
  o.results = std::move(results);
  return o;
}

Json entry(const std::string& type, const std::string& provenance) {
  return Json{{"type", type}, {"provenance", provenance}};
}

// "indicator:lo,hi;lo,hi", "haar:K" (classical h_K) or a PCF file.
PCF pcf_from_spec(const std::string& spec) {
  if (spec.rfind("indicator:", 0) == 0) return PCF::indicator(simple_set_from_spec(spec.substr(10)));
  if (spec.rfind("haar:", 0) == 0) {
    const long k = long_list(spec.substr(5)).at(0);
    if (k < 1 || k > (1L << 20)) throw ValidationError("haar index out of range");
    return classical_haar(static_cast<std::size_t>(k), 0).at(static_cast<std::size_t>(k));
  }
  return pcf_from_json(read_json_file(spec));
}

std::size_t max_index(const FamilyStructure& s) {
  return *std::max_element(s.indices.begin(), s.indices.end());
}

FamilyStructure structure_from_spec(const std::string& text) {
  std::vector<std::vector<std::size_t>> sets;
  std::string cur;
  auto flush = [&] {
    std::vector<std::size_t> set;
    if (!cur.empty())
      for (long v : long_list(cur)) {
        if (v < 1) throw ValidationError("indices start at 1");
        set.push_back(static_cast<std::size_t>(v));
      }
    sets.push_back(std::move(set));
    cur.clear();
  };
  for (char c : text) {
    if (c == ';')
      flush();
    else
      cur.push_back(c);
  }
  flush();
  return FamilyStructure::from_sets(sets);
}

Json md_report_json(const MdReport& r) {
  Json v = Json::array();
  for (const auto& x : r.violations)
    v.push_back(Json{{"index", x.index}, {"condition", x.condition}, {"witness", to_json(x.witness)},
                     {"detail", x.detail}});
  Json j{{"pass", r.pass()},
         {"constant_ok", r.constant_ok},
         {"mean_zero_ok", r.mean_zero_ok},
         {"orthonormal_ok", r.orthonormal_ok},
         {"gram_size", r.gram_size}};
  j["complete_ok"] = r.complete_ok ? Json(*r.complete_ok) : Json(nullptr);
  j["violations"] = v;
  return j;
}

// Sparse coefficient file: {"system": spec, "terms": [[index, "p/q"], ...]}.
struct CoeffFile {
  std::string system;
  Coeffs dense;
};

CoeffFile read_coeffs(const std::string& path) {
  const Json j = read_json_file(path);
  CoeffFile c;
  c.system = j.value("system", std::string());
  for (const auto& t : j.at("terms")) {
    const std::size_t idx = t.at(0).get<std::size_t>();
    if (idx == 0) throw ValidationError("coefficient indices start at 1");
    if (c.dense.size() < idx) c.dense.resize(idx);
    c.dense[idx - 1] = RadScalar(rational_from_json(t.at(1)));
  }
  if (c.dense.empty()) throw ValidationError("coefficient file has no terms");
  return c;
}

// ---------------------------------------------------------------------------

void add_haar(CLI::App& app, const Globals& g, HandlerMap& h) {
  auto* haar = app.add_subcommand("haar", "Generate and verify orthonormal systems");
  haar->require_subcommand(1);
  haar->fallthrough();

  struct GenOpts {
    std::string kind;
    int depth = 4;
    std::size_t count = 0;
    std::string splits;
    std::string ratio;
    bool random = false;
    int denominator = 8;
  };
  auto o = std::make_shared<GenOpts>();
  auto* gen = haar->add_subcommand("gen", "Generate a classical, generalized or Rademacher system");
  gen->add_option("--kind", o->kind, "classical | generalized | rademacher")
      ->required()
      ->check(CLI::IsMember({"classical", "generalized", "rademacher"}));
  gen->add_option("--depth", o->depth, "Tree depth (Rademacher: number of functions)")
      ->check(CLI::Range(0, 20))
      ->capture_default_str();
  gen->add_option("--count", o->count, "Keep only the first COUNT functions");
  gen->add_option("--splits", o->splits, "JSON file with split points in breadth-first order");
  gen->add_option("--ratio", o->ratio, "Uniform relative split position, e.g. 1/3");
  gen->add_flag("--random", o->random, "Random split ratios drawn with --seed");
  gen->add_option("--denominator", o->denominator, "Denominator of random split ratios")
      ->check(CLI::Range(2, 1 << 16))
      ->capture_default_str();
  h[gen] = [o, &g] {
    OrthoSystem s;
    const std::optional<std::size_t> count = o->count ? std::optional(o->count) : std::nullopt;
    if (o->kind == "classical") {
      s = classical_haar(count.value_or(std::size_t{1} << o->depth));
    } else if (o->kind == "rademacher") {
      s = rademacher(count.value_or(static_cast<std::size_t>(std::max(1, o->depth))));
    } else {
      SplitTree tree = SplitTree::midpoint(o->depth);
      if (!o->splits.empty()) {
        std::vector<Rational> sp;
        for (const auto& x : read_json_file(o->splits)) sp.push_back(rational_from_json(x));
        tree = SplitTree::from_splits(o->depth, sp);
      } else if (!o->ratio.empty()) {
        tree = SplitTree::uniform_ratio(o->depth, parse_rational(o->ratio));
      } else if (o->random) {
        tree = SplitTree::random(o->depth, g.seed, o->denominator);
      }
      s = generalized_haar(tree, count);
    }
    Json r = entry("system", "exact");
    r["kind"] = to_string(s.kind);
    r["size"] = s.size();
    return single("system.json", dump(to_json(s)), Json::array({r}));
  };

  auto sys = std::make_shared<std::string>();
  auto* verify = haar->add_subcommand("verify", "Check the martingale difference conditions exactly");
  verify->add_option("--system", *sys, "System spec or file")->required();
  h[verify] = [sys, &g] {
    const OrthoSystem s = system_from_spec(*sys, g.seed);
    const MdReport r = verify_md(s);
    Json e = entry("verify", "exact");
    e["pass"] = r.pass();
    return single("verify.json", dump(md_report_json(r)), Json::array({e}));
  };

  struct ExpandOpts {
    std::string system;
    std::string pcf;
    std::size_t upto = 0;
  };
  auto eo = std::make_shared<ExpandOpts>();
  auto* expand_cmd = haar->add_subcommand("expand", "Exact Fourier coefficients of a function");
  expand_cmd->add_option("--system", eo->system, "System spec or file")->required();
  expand_cmd->add_option("--pcf", eo->pcf, "Function: indicator:lo,hi, haar:K or a PCF file")->required();
  expand_cmd->add_option("--upto", eo->upto, "Number of coefficients (default: all)");
  h[expand_cmd] = [eo, &g] {
    const OrthoSystem s = system_from_spec(eo->system, g.seed);
    const Expansion e = expand(pcf_from_spec(eo->pcf), s, eo->upto ? eo->upto : s.size());
    Json c = Json::array();
    for (const auto& x : e.coefficients) c.push_back(to_json(x));
    const Json j{{"coefficients", c}, {"residual", to_json(e.residual)}};
    return single("expansion.json", dump(j), Json::array({entry("expand", "exact")}));
  };
}

// ---------------------------------------------------------------------------

void add_mp(CLI::App& app, const Globals& g, HandlerMap& h) {
  auto* mp = app.add_subcommand("mp", "Build, compose, apply and check measure-preserving maps");
  mp->require_subcommand(1);
  mp->fallthrough();

  struct BuildOpts {
    std::string map;
    long n = 2;
    std::string set;
    std::string partition;
  };
  auto b = std::make_shared<BuildOpts>();
  auto* build = mp->add_subcommand("build", "Construct one of the standard maps");
  build->add_option("--map", b->map, "identity | eta | xi | xi-inverse | u | u-partition")
      ->required()
      ->check(CLI::IsMember({"identity", "eta", "xi", "xi-inverse", "u", "u-partition"}));
  build->add_option("--n", b->n, "Number of copies")->check(CLI::Range(1L, 1L << 20))->capture_default_str();
  build->add_option("--set", b->set, "Simple set lo,hi;lo,hi for xi and u");
  build->add_option("--partition", b->partition, "Blocks separated by | or a partition file");
  h[build] = [b] {
    PwAffineMap m;
    auto need = [](const std::string& v, const char* what) {
      if (v.empty()) throw ValidationError(std::string("--") + what + " is required for this map");
      return v;
    };
    if (b->map == "identity")
      m = PwAffineMap::identity();
    else if (b->map == "eta")
      m = eta_map(b->n);
    else if (b->map == "xi")
      m = xi_map(simple_set_from_spec(need(b->set, "set")));
    else if (b->map == "xi-inverse")
      m = xi_inverse(simple_set_from_spec(need(b->set, "set")));
    else if (b->map == "u")
      m = u_map(simple_set_from_spec(need(b->set, "set")), b->n);
    else
      m = u_partition_map(partition_from_spec(need(b->partition, "partition")), b->n);
    return single("map.json", dump(to_json(m)), Json::array({entry("map", "exact")}));
  };

  auto maps = std::make_shared<std::vector<std::string>>();
  auto* comp = mp->add_subcommand("compose", "Compose maps, outermost first");
  comp->add_option("--maps", *maps, "Map files, outermost first")->required()->expected(1, -1);
  h[comp] = [maps] {
    PwAffineMap m = pw_affine_from_json(read_json_file(maps->back()));
    for (std::size_t i = maps->size() - 1; i-- > 0;) m = compose(pw_affine_from_json(read_json_file((*maps)[i])), m);
    return single("map.json", dump(to_json(m)), Json::array({entry("map", "exact")}));
  };

  struct ApplyOpts {
    std::string map;
    std::string x;
    std::string pcf;
  };
  auto a = std::make_shared<ApplyOpts>();
  auto* apply = mp->add_subcommand("apply", "Evaluate a map at a point or pull back a function");
  apply->add_option("--map", a->map, "Map file")->required();
  auto* xo = apply->add_option("--x", a->x, "Rational point in [0,1)");
  apply->add_option("--pcf", a->pcf, "Function to pull back")->excludes(xo);
  h[apply] = [a] {
    const PwAffineMap m = pw_affine_from_json(read_json_file(a->map));
    if (!a->x.empty()) {
      const Json j{{"x", to_json(parse_rational(a->x))}, {"image", to_json(m(parse_rational(a->x)))}};
      return single("apply.json", dump(j), Json::array({entry("apply", "exact")}));
    }
    if (a->pcf.empty()) throw ValidationError("give --x or --pcf");
    return single("pullback.json", dump(to_json(pullback(pcf_from_spec(a->pcf), m))),
                  Json::array({entry("pullback", "exact")}));
  };

  struct CheckOpts {
    std::string map;
    int resolution = 10;
    std::size_t probes = 0;
  };
  auto c = std::make_shared<CheckOpts>();
  auto* check = mp->add_subcommand("check", "Exact preimage measures on dyadic probes");
  check->add_option("--map", c->map, "Map file")->required();
  check->add_option("--resolution", c->resolution, "Dyadic probe resolution 2^-R")
      ->check(CLI::Range(0, 16))
      ->capture_default_str();
  check->add_option("--probes", c->probes, "Random unions of dyadic intervals instead of the exhaustive family");
  h[check] = [c, &g] {
    const PwAffineMap m = pw_affine_from_json(read_json_file(c->map));
    std::vector<SimpleSet> probes;
    if (c->probes == 0) {
      probes = dyadic_probes(c->resolution);
    } else {
      std::mt19937_64 rng(g.seed);
      const long cells = 1L << c->resolution;
      std::uniform_int_distribution<long> cell(0, cells - 1);
      std::uniform_int_distribution<int> parts(1, 4);
      for (std::size_t i = 0; i < c->probes; ++i) {
        std::vector<Interval> iv;
        for (int k = parts(rng); k > 0; --k) {
          const long x = cell(rng);
          iv.emplace_back(make_rational(x, cells), make_rational(x + 1, cells));
        }
        probes.emplace_back(std::move(iv));
      }
    }
    const MeasureReport r = check_measure_preserving(m, probes);
    Json v = Json::array();
    for (const auto& p : r.violations)
      v.push_back(Json{{"probe", to_json(p.probe)},
                       {"measure", to_json(p.measure)},
                       {"preimage_measure", to_json(p.preimage_measure)}});
    const Json j{{"pass", r.pass}, {"probes", r.probes}, {"failures", r.failures}, {"violations", v}};
    Json e = entry("mp-check", "exact");
    e["pass"] = r.pass;
    return single("check.json", dump(j), Json::array({e}));
  };

  struct CorrOpts {
    std::string f;
    std::string g;
    std::string partition;
    std::string n_list = "1,2,4,8,16";
  };
  auto co = std::make_shared<CorrOpts>();
  auto* corr = mp->add_subcommand("correlate", "Correlations under u_{A,n} against their limit");
  corr->add_option("--f", co->f, "First function")->required();
  corr->add_option("--g", co->g, "Second function")->required();
  corr->add_option("--partition", co->partition, "Partition A")->required();
  corr->add_option("--n-list", co->n_list, "Comma-separated n values")->capture_default_str();
  h[corr] = [co] {
    const auto rows = correlation_limit(pcf_from_spec(co->f), pcf_from_spec(co->g),
                                        partition_from_spec(co->partition), long_list(co->n_list));
    Json arr = Json::array();
    for (const auto& r : rows)
      arr.push_back(Json{{"n", r.n}, {"value", to_json(r.value)}, {"target", to_json(r.target)},
                         {"gap", to_json(r.gap)}});
    return single("correlation.json", dump(arr), Json::array({entry("correlation", "exact")}));
  };
}

// ---------------------------------------------------------------------------

Json kappa_result(const KappaEstimate& e) {
  Json r = entry("kappa", "certified-float");
  r["system"] = e.system;
  r["n"] = e.structure.n;
  r["value"] = e.value;
  r["kind"] = to_string(e.kind);
  r["flagged"] = e.flagged;
  return r;
}

void add_kappa(CLI::App& app, const Globals& g, HandlerMap& h) {
  auto* kappa = app.add_subcommand("kappa", "Exact, alternating and permutation-search kappa estimates");
  kappa->require_subcommand(1);
  kappa->fallthrough();

  struct FamOpts {
    std::string sets;
    std::string system;
    double budget = 24.0;
    int restarts = 32;
    int max_iterations = 500;
  };
  auto f = std::make_shared<FamOpts>();
  auto system_for = [&g](const FamOpts& o, const FamilyStructure& s) {
    return o.system.empty() ? classical_haar(max_index(s), 0) : system_from_spec(o.system, g.seed);
  };
  auto* exact = kappa->add_subcommand("exact", "Maximum over all selection patterns");
  exact->add_option("--sets", f->sets, "Nested index sets, e.g. \"1;1,2\"")->required();
  exact->add_option("--system", f->system, "System spec or file (default: classical Haar)");
  exact->add_option("--budget", f->budget, "Largest log2 of the pattern count")->capture_default_str();
  h[exact] = [f, system_for] {
    const FamilyStructure s = structure_from_spec(f->sets);
    ExactKappaOptions o;
    o.budget_bits = f->budget;
    const KappaEstimate e = exact_kappa(s, system_for(*f, s), o);
    return single("kappa.json", dump(to_json(e)), Json::array({kappa_result(e)}));
  };

  auto* alt = kappa->add_subcommand("alt", "Alternating maximization with random restarts");
  alt->add_option("--sets", f->sets, "Nested index sets, e.g. \"1;1,2\"")->required();
  alt->add_option("--system", f->system, "System spec or file (default: classical Haar)");
  alt->add_option("--restarts", f->restarts, "Random restarts")->check(CLI::Range(1, 1 << 16))->capture_default_str();
  alt->add_option("--max-iterations", f->max_iterations, "Iterations per restart")->capture_default_str();
  h[alt] = [f, system_for, &g] {
    const FamilyStructure s = structure_from_spec(f->sets);
    AltMaxOptions o;
    o.restarts = f->restarts;
    o.seed = g.seed;
    o.max_iterations = f->max_iterations;
    const KappaEstimate e = alt_max_kappa(s, system_for(*f, s), o);
    return single("kappa.json", dump(to_json(e)), Json::array({kappa_result(e)}));
  };

  struct NuOpts {
    std::size_t n = 2;
    std::string strategy = "anneal";
    std::size_t budget = 4000;
    int restarts = 2;
    std::string warm;
  };
  auto nu = std::make_shared<NuOpts>();
  auto* nuc = kappa->add_subcommand("nu", "Permutation search for lower-bound certificates on classical Haar");
  nuc->add_option("--n", nu->n, "Number of functions")->required()->check(CLI::Range(1, 4096));
  nuc->add_option("--strategy", nu->strategy, "exhaustive | random | anneal")
      ->check(CLI::IsMember({"exhaustive", "random", "anneal"}))
      ->capture_default_str();
  nuc->add_option("--budget", nu->budget, "Permutation evaluations")->capture_default_str();
  nuc->add_option("--restarts", nu->restarts, "alt-max restarts per permutation")->capture_default_str();
  nuc->add_option("--warm", nu->warm, "Certificate at a smaller n to start from");
  h[nuc] = [nu, &g] {
    NuOptions o;
    o.strategy = nu_strategy_from_string(nu->strategy);
    o.budget = nu->budget;
    o.seed = g.seed;
    o.restarts = nu->restarts;
    if (!nu->warm.empty()) o.warm_start = kappa_estimate_from_json(read_json_file(nu->warm));
    const KappaEstimate e = nu_search(nu->n, o);
    return single("kappa.json", dump(to_json(e)), Json::array({kappa_result(e)}));
  };

  struct TransferOpts {
    std::string certificate;
    std::string target;
    std::string eps = "2^-10";
    int max_log = 10;
  };
  auto t = std::make_shared<TransferOpts>();
  auto* tr = kappa->add_subcommand("transfer", "Move a Haar certificate to a complete system");
  tr->add_option("--certificate", t->certificate, "Haar lower-bound certificate")->required();
  tr->add_option("--target", t->target, "Target system spec or file")->required();
  tr->add_option("--eps", t->eps, "Approximation accuracy per step")->capture_default_str();
  tr->add_option("--max-log", t->max_log, "n schedule 1, 2, ..., 2^max-log")
      ->check(CLI::Range(0, 16))
      ->capture_default_str();
  h[tr] = [t, &g] {
    const KappaEstimate cert = kappa_estimate_from_json(read_json_file(t->certificate));
    const Rational eps = eps_from_spec(t->eps, 1).front();
    const TransferResult r =
        transfer_kappa_lower(system_from_spec(t->target, g.seed), cert, eps, default_n_schedule(t->max_log));
    Json j = to_json(r.estimate);
    j["direct"] = r.direct;
    j["delta_bound"] = r.delta_bound;
    j["transferred"] = Json{{"value", r.transferred.value}, {"error", r.transferred.error}};
    j["certified"] = r.certified;
    Json res = kappa_result(r.estimate);
    res["transfer"] = true;
    return single("kappa.json", dump(j), Json::array({res}));
  };
}

// ---------------------------------------------------------------------------

void add_goodlambda(CLI::App& app, const Globals& g, HandlerMap& h) {
  auto* gl = app.add_subcommand("goodlambda", "Good-lambda level set scans");
  gl->require_subcommand(1);
  gl->fallthrough();

  struct GenOpts {
    std::size_t terms = 64;
    std::size_t max_index = 1024;
  };
  auto go = std::make_shared<GenOpts>();
  auto* gen = gl->add_subcommand("gen", "Random Haar polynomial with dyadic coefficients");
  gen->add_option("--terms", go->terms, "Number of nonzero terms")->capture_default_str();
  gen->add_option("--max-index", go->max_index, "Largest Haar index (a power of two)")->capture_default_str();
  h[gen] = [go, &g] {
    if (go->max_index == 0 || (go->max_index & (go->max_index - 1)) != 0)
      throw ValidationError("--max-index must be a power of two");
    if (go->terms == 0 || go->terms > go->max_index) throw ValidationError("--terms must be in 1..max-index");
    std::mt19937_64 rng(g.seed);
    std::vector<std::size_t> idx(go->max_index);
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i + 1;
    for (std::size_t k = 0; k < go->terms; ++k)
      std::swap(idx[k], idx[std::uniform_int_distribution<std::size_t>(k, idx.size() - 1)(rng)]);
    idx.resize(go->terms);
    std::sort(idx.begin(), idx.end());
    std::uniform_int_distribution<long> num(1, 8);
    Json terms = Json::array();
    for (std::size_t j : idx) {
      const long v = num(rng) * (std::uniform_int_distribution<int>(0, 1)(rng) ? 1 : -1);
      terms.push_back(Json::array({j, to_json(make_rational(v, 8))}));
    }
    int depth = 0;
    while ((std::size_t{1} << depth) < go->max_index) ++depth;
    const Json j{{"system", "classical:" + std::to_string(depth)}, {"terms", terms}};
    return single("coeffs.json", dump(j), Json::array({entry("coefficients", "exact")}));
  };

  struct ScanOpts {
    std::string coeffs;
    std::string system;
    std::string lambda_grid = "1/2,1,2";
    std::string eps_grid;
    std::string eps_n = "2,4,8,16,64,256,1024";
    double eps_c = 1.0;
  };
  auto so = std::make_shared<ScanOpts>();
  auto* scan = gl->add_subcommand("scan", "Exact |{Mf > l, Sf < e l}| against |{Mf > l/2}|");
  scan->add_option("--coeffs", so->coeffs, "Coefficient file")->required();
  scan->add_option("--system", so->system, "System spec (default: from the coefficient file)");
  scan->add_option("--lambda-grid", so->lambda_grid, "lambda / ||f||_2 values")->capture_default_str();
  auto* eg = scan->add_option("--eps-grid", so->eps_grid, "Explicit eps values");
  scan->add_option("--eps-n", so->eps_n, "n values for eps_n = (c / ln n)^(1/2)")->excludes(eg)->capture_default_str();
  scan->add_option("--eps-c", so->eps_c, "Constant c of eps_n")->capture_default_str();
  h[scan] = [so, &g] {
    const CoeffFile cf = read_coeffs(so->coeffs);
    std::string spec = so->system.empty() ? cf.system : so->system;
    if (spec.empty()) throw ValidationError("no system given");
    const OrthoSystem s = system_from_spec(spec, g.seed);
    const std::vector<Rational> eps =
        so->eps_grid.empty() ? eps_grid(long_list(so->eps_n), so->eps_c) : rational_list(so->eps_grid);
    const GoodLambdaTable t = good_lambda_scan(cf.dense, s, rational_list(so->lambda_grid), eps);
    std::ostringstream csv;
    csv << "lambda_factor,eps,lhs,mid,rhs,ratio,eps_float,lhs_float,rhs_float,ratio_float,flagged\n";
    for (const auto& r : t.rows)
      csv << to_string(r.lambda_factor) << ',' << to_string(r.eps) << ',' << to_string(r.lhs) << ','
          << to_string(r.mid) << ',' << to_string(r.rhs) << ',' << (r.ratio ? to_string(*r.ratio) : "") << ','
          << fmt(to_double(r.eps)) << ',' << fmt(to_double(r.lhs)) << ',' << fmt(to_double(r.rhs)) << ','
          << (r.ratio ? fmt(r.ratio_value) : "") << ',' << (r.flagged ? 1 : 0) << '\n';
    const CwwFit fit = cww_exponent_fit(t.rows);
    Json e = entry("goodlambda", "exact");
    e["rows"] = t.rows.size();
    e["c_fit"] = fit.defined ? Json(fit.c_fit) : Json(nullptr);
    return single("goodlambda.csv", csv.str(), Json::array({e}));
  };

  auto table = std::make_shared<std::string>();
  auto* fitc = gl->add_subcommand("fit", "Fit exp(-c/eps^2) to a scan table");
  fitc->add_option("--table", *table, "CSV written by goodlambda scan")->required();
  h[fitc] = [table] {
    std::istringstream in(read_file(*table));
    std::string line;
    std::getline(in, line);
    std::vector<GoodLambdaRow> rows;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::vector<std::string> cols;
      std::string cur;
      for (char c : line) {
        if (c == ',') {
          cols.push_back(cur);
          cur.clear();
        } else {
          cur.push_back(c);
        }
      }
      cols.push_back(cur);
      if (cols.size() < 6) throw ValidationError("malformed table row: " + line);
      GoodLambdaRow r;
      r.lambda_factor = parse_rational(cols[0]);
      r.eps = parse_rational(cols[1]);
      r.lhs = parse_rational(cols[2]);
      r.mid = parse_rational(cols[3]);
      r.rhs = parse_rational(cols[4]);
      if (!cols[5].empty()) {
        r.ratio = parse_rational(cols[5]);
        r.ratio_value = to_double(*r.ratio);
      } else {
        r.flagged = true;
      }
      rows.push_back(r);
    }
    const CwwFit f = cww_exponent_fit(rows);
    const Json j{{"defined", f.defined}, {"c_fit", f.c_fit}, {"rms_residual", f.rms_residual},
                 {"rows_used", f.rows_used}, {"groups", f.groups}};
    Json e = entry("cww-fit", "certified-float");
    e["c_fit"] = f.defined ? Json(f.c_fit) : Json(nullptr);
    return single("fit.json", dump(j), Json::array({e}));
  };
}

// ---------------------------------------------------------------------------

void add_lemma1(CLI::App& app, const Globals& g, HandlerMap& h) {
  auto* l1 = app.add_subcommand("lemma1", "Transformation of a martingale difference into non-overlapping polynomials");
  l1->require_subcommand(1);
  l1->fallthrough();
  struct RunOpts {
    std::string md;
    std::string phi;
    std::string eps = "2^-k-1";
    std::size_t steps = 1;
    int max_log = 10;
    std::size_t probes = 50;
  };
  auto o = std::make_shared<RunOpts>();
  auto* run = l1->add_subcommand("run", "Run the inductive construction for K steps");
  run->add_option("--md", o->md, "Martingale difference system spec or file")->required();
  run->add_option("--phi", o->phi, "Target orthonormal system spec or file")->required();
  run->add_option("--eps", o->eps, "2^-k-1, 2^-k, 2^-E or a rational")->capture_default_str();
  run->add_option("--steps", o->steps, "Number of steps K")->check(CLI::Range(1, 1 << 16))->capture_default_str();
  run->add_option("--max-log", o->max_log, "n schedule 1, 2, ..., 2^max-log")
      ->check(CLI::Range(0, 16))
      ->capture_default_str();
  run->add_option("--probes", o->probes, "Random joint level-set probes for the transformation check")
      ->capture_default_str();
  h[run] = [o, &g] {
    const OrthoSystem f = system_from_spec(o->md, g.seed);
    const OrthoSystem phi = system_from_spec(o->phi, g.seed);
    const Lemma1Result r = lemma1_run(f, phi, eps_from_spec(o->eps, o->steps), o->steps,
                                      default_n_schedule(o->max_log));
    OrthoSystem head;
    head.kind = f.kind;
    head.functions.assign(f.functions.begin(), f.functions.begin() + static_cast<long>(o->steps));
    const TransformationReport tc =
        transformation_check(head, r.transformed, random_level_probes(head, o->probes, g.seed));

    Json polys = Json::array();
    for (std::size_t k = 0; k < r.state.windows.size(); ++k) {
      Json c = Json::array();
      for (const auto& x : r.state.poly_coeffs[k]) c.push_back(to_json(x));
      polys.push_back(Json{{"k", k + 1},
                           {"window", Json::array({r.state.windows[k].first, r.state.windows[k].second})},
                           {"coefficients", c}});
    }
    Json steps = Json::array();
    bool ok = true;
    for (const auto& rec : r.state.records) {
      steps.push_back(to_json(rec));
      ok = ok && compare(rec.error_sq, RadScalar(rec.eps * rec.eps)) < 0;
    }
    const Json report{{"steps", steps},
                      {"all_errors_certified", ok},
                      {"transformation_check",
                       Json{{"probes", tc.probes}, {"violations", tc.violations}}}};
    CommandOutput out;
    out.directory = true;
    out.artifacts.push_back(Artifact{"transform.json", dump(to_json(r.state.tau))});
    out.artifacts.push_back(Artifact{"polynomials.json", dump(polys)});
    out.artifacts.push_back(Artifact{"report.json", dump(report)});
    Json e = entry("lemma1", "exact");
    e["steps"] = o->steps;
    e["certified"] = ok;
    e["transformation_violations"] = tc.violations;
    out.results.push_back(e);
    return out;
  };
}

// ---------------------------------------------------------------------------

WeylMultiplier multiplier_from(const std::string& name, const std::string& table) {
  if (!table.empty()) {
    std::vector<double> v = read_json_file(table).get<std::vector<double>>();
    return WeylMultiplier::tabulated(std::move(v), table);
  }
  return WeylMultiplier::preset(name);
}

void add_sim(CLI::App& app, const Globals& g, HandlerMap& h) {
  auto* sim = app.add_subcommand("sim", "Finite-scale convergence simulations");
  sim->require_subcommand(1);
  sim->fallthrough();

  struct WeylOpts {
    std::string omega = "log1p^2";
    std::string table;
    std::size_t n = 1 << 20;
    std::size_t k = 10;
  };
  auto w = std::make_shared<WeylOpts>();
  auto* weyl = sim->add_subcommand("weyl", "Partial sums of sum 1/(n omega(n))");
  weyl->add_option("--omega", w->omega, "Multiplier preset")->capture_default_str();
  weyl->add_option("--table", w->table, "JSON array of omega(1), omega(2), ...");
  weyl->add_option("--N", w->n, "Truncation")->check(CLI::Range(2, 1 << 28))->capture_default_str();
  h[weyl] = [w] {
    const SeriesDiag d = weyl_tail_diag(multiplier_from(w->omega, w->table), w->n);
    Json e = entry("weyl", "certified-float");
    e["verdict"] = d.verdict;
    return single("weyl.json", dump(to_json(d)), Json::array({e}));
  };

  auto* l2 = sim->add_subcommand("lemma2", "Minimal n_k with omega(n_k) >= k");
  l2->add_option("--omega", w->omega, "Multiplier preset")->capture_default_str();
  l2->add_option("--table", w->table, "JSON array of omega(1), omega(2), ...");
  l2->add_option("--K", w->k, "Number of indices")->capture_default_str();
  l2->add_option("--N", w->n, "Search range")->check(CLI::Range(1, 1 << 28))->capture_default_str();
  h[l2] = [w] {
    const Lemma2Indices r = lemma2_indices(multiplier_from(w->omega, w->table), w->k, w->n);
    const Json j{{"indices", r.indices}, {"complete", r.complete}};
    Json e = entry("lemma2", "exact");
    e["complete"] = r.complete;
    return single("lemma2.json", dump(j), Json::array({e}));
  };

  struct C1Opts {
    std::string coeffs = "default";
    std::string system = "classical:10";
    std::size_t k = 8;
    double kappa_constant = kKappaLogBound;
  };
  auto c = std::make_shared<C1Opts>();
  auto* c1 = sim->add_subcommand("corollary1", "Dyadic block maxima against the coefficient budget");
  c1->add_option("--coeffs", c->coeffs, "default | boundary | JSON array of rationals")->capture_default_str();
  c1->add_option("--system", c->system, "System spec or file")->capture_default_str();
  c1->add_option("--K", c->k, "Number of dyadic blocks")->check(CLI::Range(1, 20))->capture_default_str();
  c1->add_option("--kappa-constant", c->kappa_constant, "K in the block bound K sqrt(k+1)")->capture_default_str();
  h[c1] = [c, &g] {
    const OrthoSystem s = system_from_spec(c->system, g.seed);
    std::vector<Rational> a;
    if (c->coeffs == "default" || c->coeffs == "boundary") {
      a = coefficient_preset(c->coeffs, s.size());
    } else {
      for (const auto& x : read_json_file(c->coeffs)) a.push_back(rational_from_json(x));
    }
    std::vector<std::size_t> bounds(s.size() + 1);
    for (std::size_t i = 0; i < bounds.size(); ++i) bounds[i] = i;
    const NonOverlapFamily fam = NonOverlapFamily::windows(bounds, std::vector<RadScalar>(s.size(), RadScalar(1)));
    const Corollary1Report r = corollary1_sim(a, fam, s, c->k, c->kappa_constant);
    std::ostringstream csv;
    csv << "k,lo,hi,delta_sq,budget,delta_norm,block_kappa,kappa_bound,within_bound,cumulative_delta_sq,"
           "cumulative_rhs,cumulative_ok\n";
    for (const auto& b : r.blocks)
      csv << b.k << ',' << b.lo << ',' << b.hi << ',' << b.delta_sq.to_string() << ',' << b.budget.to_string()
          << ',' << fmt(b.delta_norm) << ',' << fmt(b.block_kappa) << ',' << fmt(b.kappa_bound) << ','
          << (b.within_bound ? 1 : 0) << ',' << fmt(b.cumulative_delta_sq) << ',' << fmt(b.cumulative_rhs) << ','
          << (b.cumulative_ok ? 1 : 0) << '\n';
    Json e = entry("corollary1", "exact");
    e["inequality_holds"] = r.inequality_holds;
    e["all_within_bound"] = r.all_within_bound;
    return single("corollary1.csv", csv.str(), Json::array({e}));
  };

  struct L3Opts {
    std::string u = "log";
    std::string delta = "log-loglog";
    std::size_t n = 1 << 20;
  };
  auto l = std::make_shared<L3Opts>();
  auto* l3 = sim->add_subcommand("lemma3", "Composition of multipliers and its series diagnostics");
  l3->add_option("--u", l->u, "Outer multiplier preset")->capture_default_str();
  l3->add_option("--delta", l->delta, "Inner multiplier preset")->capture_default_str();
  l3->add_option("--N", l->n, "Truncation")->check(CLI::Range(2, 1 << 28))->capture_default_str();
  h[l3] = [l] {
    const Lemma3Report r = lemma3_compose(WeylMultiplier::preset(l->u), WeylMultiplier::preset(l->delta), l->n);
    const Json j{{"d3", to_json(r.d3)},
                 {"omega_over_log_increasing", r.omega_over_log_increasing},
                 {"omega", to_json(r.omega_diag)}};
    Json e = entry("lemma3", "certified-float");
    e["d3_verdict"] = r.d3.verdict;
    e["omega_verdict"] = r.omega_diag.verdict;
    return single("lemma3.json", dump(j), Json::array({e}));
  };
}

void add_report(CLI::App& app, HandlerMap& h) {
  struct Opts {
    std::vector<std::string> manifests;
    std::string format = "md";
  };
  auto o = std::make_shared<Opts>();
  auto* rep = app.add_subcommand("report", "Summarize run manifests");
  rep->fallthrough();
  rep->add_option("manifests", o->manifests, "Manifest files");
  rep->add_option("--format", o->format, "md | csv")->check(CLI::IsMember({"md", "csv"}))->capture_default_str();
  h[rep] = [o] { return report(o->manifests, o->format); };
}

}  // namespace

void register_commands(CLI::App& app, const Globals& globals, HandlerMap& handlers) {
  add_haar(app, globals, handlers);
  add_mp(app, globals, handlers);
  add_kappa(app, globals, handlers);
  add_goodlambda(app, globals, handlers);
  add_lemma1(app, globals, handlers);
  add_sim(app, globals, handlers);
  add_report(app, handlers);
}

}  // namespace mdlab::cli
