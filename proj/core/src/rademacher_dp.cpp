// Copyright 2026 The mdlab Authors
// SPDX-License-Identifier: Apache-2.0

#include <map>
#include <utility>

#include "mdlab/errors.hpp"
#include "mdlab/operators.hpp"

namespace mdlab {

Rational rademacher_kappa_sq(const FamilyStructure& structure, const std::vector<Rational>& coeffs,
                             std::size_t max_states) {
  if (coeffs.size() != structure.size()) throw ValidationError("one coefficient per family index");
  Rational energy(0);
  for (const auto& c : coeffs) energy += c * c;
  if (energy == 0) throw DomainError("kappa ratio undefined: ||p_n||_2 = 0");

  // (partial sum, running max of |partial sums|) -> probability
  using State = std::pair<Rational, Rational>;
  std::map<State, Rational> states{{{Rational(0), Rational(0)}, Rational(1)}};
  std::size_t q = 0;
  for (std::size_t m = 1; m <= structure.n; ++m) {
    std::map<Rational, Rational> incr{{Rational(0), Rational(1)}};
    for (; q < structure.size() && structure.steps[q] == m; ++q) {
      std::map<Rational, Rational> next;
      for (const auto& [x, p] : incr) {
        next[x + coeffs[q]] += p / 2;
        next[x - coeffs[q]] += p / 2;
      }
      incr = std::move(next);
      if (incr.size() > max_states) throw BudgetError("Rademacher increment support exceeds budget");
    }
    if (incr.size() == 1 && incr.begin()->first == 0) continue;
    std::map<State, Rational> next;
    for (const auto& [st, p] : states) {
      for (const auto& [x, px] : incr) {
        Rational s = st.first + x;
        Rational a = abs(s);
        next[{std::move(s), a > st.second ? std::move(a) : st.second}] += p * px;
      }
      if (next.size() > max_states)
        throw BudgetError("Rademacher state count " + std::to_string(next.size()) +
                          " exceeds budget " + std::to_string(max_states));
    }
    states = std::move(next);
  }
  Rational e(0);
  for (const auto& [st, p] : states) e += p * st.second * st.second;
  return e / energy;
}

}  // namespace mdlab
