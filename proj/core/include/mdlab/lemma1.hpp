// Copyright 2026 The mdlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mdlab/errors.hpp"
#include "mdlab/mp_transforms.hpp"
#include "mdlab/serialize.hpp"
#include "mdlab/systems.hpp"

namespace mdlab {

/// The inductive construction could not finish within its inputs (n schedule
/// or working depth of the target system).
class ConstructionError : public BudgetError {
 public:
  using BudgetError::BudgetError;
};

struct Lemma1StepRecord {
  std::size_t step = 0;
  long n = 1;
  std::size_t m = 0;  // window is (m, r]
  std::size_t r = 0;
  Rational eps;
  RadScalar head;      // sum_{i<=m} c_i^2
  RadScalar tail;      // ||f~||^2 - sum_{i<=r} c_i^2
  RadScalar error_sq;  // ||f~ - p||^2
  std::vector<std::pair<long, RadScalar>> head_trace;  // (n, head energy) per tried n
  std::size_t blocks = 0;  // size of the constancy partition
};

struct Lemma1State {
  std::size_t step = 0;
  PwAffineMap tau;
  std::vector<PCF> transformed;
  std::vector<std::pair<std::size_t, std::size_t>> windows;
  std::vector<std::vector<RadScalar>> poly_coeffs;  // for indices m+1..r
  std::vector<Lemma1StepRecord> records;

  std::size_t max_index() const { return windows.empty() ? 0 : windows.back().second; }
  PCF polynomial(std::size_t k, const OrthoSystem& phi) const;
};

/// Blocks on which every function is constant, grouped by joint value.
Partition constancy_partition(const std::vector<PCF>& fns);

/// 1, 2, 4, ..., 2^max_log.
std::vector<long> default_n_schedule(int max_log = 10);
/// eps_k = 2^{-k-1}, k = 1..count.
std::vector<Rational> default_eps(std::size_t count);

/// One induction step: picks n from the schedule so the energy of
/// f_next o tau_l o u_{A,n} on phi_1..phi_m drops below eps^2/4, then the
/// smallest r > m whose tail energy is below eps^2/4. Throws ValidationError
/// when a block mean of f_next o tau_l is nonzero and ConstructionError when
/// the schedule or the depth of phi runs out.
Lemma1State lemma1_step(const Lemma1State& state, const PCF& f_next, const OrthoSystem& phi,
                        const Rational& eps, const std::vector<long>& n_schedule);

struct Lemma1Result {
  Lemma1State state;
  OrthoSystem transformed;
  NonOverlapFamily family;
};

/// K steps over the martingale difference F against phi.
Lemma1Result lemma1_run(const OrthoSystem& f, const OrthoSystem& phi, const std::vector<Rational>& eps,
                        std::size_t steps, const std::vector<long>& n_schedule);

/// Thresholds lambda_k for functions f_{m_k}.
struct LevelProbe {
  std::vector<std::size_t> indices;  // 1-based
  std::vector<RadScalar> thresholds;
};

struct TransformationReport {
  std::size_t probes = 0;
  std::size_t violations = 0;
  std::vector<LevelProbe> witnesses;
};

/// Compares |{f_{m_k} > lambda_k for all k}| between the two systems.
TransformationReport transformation_check(const OrthoSystem& original, const OrthoSystem& transformed,
                                          const std::vector<LevelProbe>& probes);
/// Random probes of up to `max_size` functions with thresholds taken from
/// function values, midpoints between them and values just outside the range.
std::vector<LevelProbe> random_level_probes(const OrthoSystem& system, std::size_t count,
                                            std::uint64_t seed, std::size_t max_size = 3);

Json to_json(const Lemma1StepRecord& r);

}  // namespace mdlab
