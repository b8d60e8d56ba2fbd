// Copyright 2026 The mdlab Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <map>

#include "mdlab/errors.hpp"
#include "mdlab/operators.hpp"
#include "mdlab/parallel.hpp"

namespace mdlab {

GoodLambdaTable good_lambda_scan(const Coeffs& a, const OrthoSystem& system,
                                 const std::vector<Rational>& lambda_factors,
                                 const std::vector<Rational>& eps_grid) {
  for (const auto& t : lambda_factors)
    if (t <= 0) throw ValidationError("lambda factors must be positive");
  for (const auto& e : eps_grid)
    if (e <= 0) throw ValidationError("eps values must be positive");
  GoodLambdaTable table;
  table.norm_sq = l2_norm_sq(polynomial(a, system));
  if (table.norm_sq.is_zero()) throw ValidationError("good-lambda scan needs a nonzero polynomial");

  const PCF mf = maximal_fn(a, system);
  const PCF sf2 = square_fn_squared(a, system);
  const std::vector<const PCF*> both{&mf, &sf2};
  const auto br = common_breaks(both);
  const auto len = cell_lengths(br);
  const auto m_vals = sample_on(mf, br);
  const auto s2 = sample_on(sf2, br);
  std::vector<RadScalar> m2(m_vals.size());
  for (std::size_t i = 0; i < m_vals.size(); ++i) m2[i] = m_vals[i].square();

  const std::size_t cells = lambda_factors.size() * eps_grid.size();
  table.rows.resize(cells);
  parallel_for(cells, [&](std::size_t idx) {
    const Rational& t = lambda_factors[idx / eps_grid.size()];
    const Rational& eps = eps_grid[idx % eps_grid.size()];
    // lambda^2 = t^2 ||f||^2; compare Mf^2 and (Sf)^2 against it.
    const RadScalar lam2 = table.norm_sq * Rational(t * t);
    const RadScalar half2 = lam2 / Rational(4);
    const RadScalar eps_lam2 = lam2 * Rational(eps * eps);
    GoodLambdaRow row;
    row.lambda_factor = t;
    row.eps = eps;
    for (std::size_t i = 0; i < br.size(); ++i) {
      const bool above = compare(m2[i], lam2) > 0;
      if (above) row.mid += len[i];
      if (above && compare(s2[i], eps_lam2) < 0) row.lhs += len[i];
      if (compare(m2[i], half2) > 0) row.rhs += len[i];
    }
    if (row.rhs == 0) {
      row.flagged = true;
    } else {
      row.ratio = row.lhs / row.rhs;
      row.ratio_value = to_double(*row.ratio);
    }
    table.rows[idx] = std::move(row);
  });
  return table;
}

CwwFit cww_exponent_fit(const std::vector<GoodLambdaRow>& rows) {
  std::map<Rational, std::vector<std::pair<double, double>>> groups;
  for (const auto& r : rows) {
    if (r.flagged || !(r.ratio_value > 0.0) || !std::isfinite(r.ratio_value)) continue;
    const double e = to_double(r.eps);
    groups[r.lambda_factor].emplace_back(-1.0 / (e * e), std::log(r.ratio_value));
  }
  CwwFit fit;
  double sxy = 0.0;
  double sxx = 0.0;
  std::vector<std::pair<double, double>> centered;
  for (const auto& [lam, pts] : groups) {
    if (pts.size() < 2) continue;
    double mx = 0.0;
    double my = 0.0;
    for (const auto& [x, y] : pts) {
      mx += x;
      my += y;
    }
    mx /= static_cast<double>(pts.size());
    my /= static_cast<double>(pts.size());
    for (const auto& [x, y] : pts) {
      sxy += (x - mx) * (y - my);
      sxx += (x - mx) * (x - mx);
      centered.emplace_back(x - mx, y - my);
    }
    ++fit.groups;
  }
  fit.rows_used = centered.size();
  if (fit.rows_used < 2 || !(sxx > 0.0)) return fit;
  fit.defined = true;
  fit.c_fit = sxy / sxx;
  double ss = 0.0;
  for (const auto& [x, y] : centered) ss += (y - fit.c_fit * x) * (y - fit.c_fit * x);
  fit.rms_residual = std::sqrt(ss / static_cast<double>(fit.rows_used));
  return fit;
}

std::vector<Rational> eps_grid(const std::vector<long>& n_values, double c) {
  if (!(c > 0.0)) throw ValidationError("eps grid constant must be positive");
  std::vector<Rational> out;
  for (long n : n_values) {
    if (n < 2) throw ValidationError("eps_n needs n >= 2");
    out.push_back(rational_from_double(std::sqrt(c / std::log(static_cast<double>(n)))));
  }
  return out;
}

Json to_json(const GoodLambdaRow& row) {
  Json j{{"lambda_factor", to_json(row.lambda_factor)},
         {"eps", to_json(row.eps)},
         {"lhs", to_json(row.lhs)},
         {"mid", to_json(row.mid)},
         {"rhs", to_json(row.rhs)}};
  j["ratio"] = row.ratio ? to_json(*row.ratio) : Json(nullptr);
  j["ratio_float"] = row.ratio_value;
  j["flagged"] = row.flagged;
  return j;
}

}  // namespace mdlab
