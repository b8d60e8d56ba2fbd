// Copyright 2026 The mdlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mdlab/operators.hpp"
#include "mdlab/serialize.hpp"
#include "mdlab/systems.hpp"

namespace mdlab {

enum class CertificateKind { kExact, kLocalMax, kLowerBound };

std::string to_string(CertificateKind kind);

/// A kappa value together with the coefficients that achieve it.
struct KappaEstimate {
  double value = 1.0;
  /// Unit-norm coefficients, one per structure position.
  std::vector<double> coefficients;
  FamilyStructure structure;
  CertificateKind kind = CertificateKind::kLocalMax;
  /// Permutation for Nikishin-Ulyanov certificates (1-based system indices).
  std::optional<std::vector<std::size_t>> sigma;
  std::string system;
  /// Set when a budget ran out or a certificate could not be completed.
  bool flagged = false;
  std::string note;
  std::size_t evaluations = 0;

  /// The witness with coefficients converted exactly from their doubles.
  MonotoneFamily witness() const;
};

Json to_json(const KappaEstimate& e);
KappaEstimate kappa_estimate_from_json(const Json& j);
/// SHA-256 of the witness (structure, exact coefficients, value to 17 digits).
std::string reevaluation_hash(const KappaEstimate& e);

/// Atoms of the first `count` functions of a system with their nonzero
/// values in double precision, shared by all families over those indices.
struct SystemGrid {
  SystemGrid(const OrthoSystem& system, std::size_t count);

  std::size_t count = 0;
  std::vector<double> weights;
  std::vector<std::size_t> offsets;
  std::vector<std::uint32_t> index;  // 1-based system index
  std::vector<double> value;
};

/// The family evaluated in double precision on its exact atom grid. Atoms
/// keep their nonzero entries (position, value) in position order; a
/// selection pattern picks, per atom, how many leading entries are summed.
class FloatGrid {
 public:
  FloatGrid(const FamilyStructure& structure, const OrthoSystem& system);
  /// Same grid from precomputed atoms; the structure's indices must not
  /// exceed `base.count`.
  FloatGrid(const FamilyStructure& structure, const SystemGrid& base);

  std::size_t dims() const { return dims_; }
  std::size_t atoms() const { return weights_.size(); }
  /// Entry offsets in each atom where a step group ends (exclusive ends).
  const std::vector<std::vector<std::uint32_t>>& group_ends() const { return ends_; }

  using Pattern = std::vector<std::uint32_t>;  // per atom: number of entries summed

  /// sum_atom w max_m p_m^2 / |c|^2 and the maximizing pattern (ties toward
  /// the largest m).
  double objective(const std::vector<double>& c, Pattern* pattern = nullptr) const;
  /// Dense quadratic form of a pattern.
  std::vector<double> form(const Pattern& pattern) const;
  /// y = Q(pattern) x.
  void apply(const Pattern& pattern, const std::vector<double>& x, std::vector<double>& y) const;

 private:
  std::size_t dims_ = 0;
  std::vector<double> weights_;
  std::vector<std::size_t> offsets_;
  std::vector<std::uint32_t> pos_;
  std::vector<double> val_;
  std::vector<std::vector<std::uint32_t>> ends_;
};

struct Eigenpair {
  double value = 0.0;
  std::vector<double> vector;
  double residual = 0.0;
};

/// Dominant eigenpair of the pattern's form: dense symmetric solver up to
/// `dense_limit` dimensions, warm-started power iteration above.
Eigenpair top_eigenpair(const FloatGrid& grid, const FloatGrid::Pattern& pattern,
                        const std::vector<double>& warm, std::size_t dense_limit = 160);

struct ExactKappaOptions {
  /// Refuse when log2(number of patterns) exceeds this.
  double budget_bits = 24.0;
};

/// Maximum over all selection patterns of the top eigenvalue. BudgetError
/// when the pattern count is over budget.
KappaEstimate exact_kappa(const FamilyStructure& structure, const OrthoSystem& system,
                          const ExactKappaOptions& options = {});

struct AltMaxOptions {
  int restarts = 32;
  std::uint64_t seed = 0;
  int max_iterations = 500;
  /// Extra start tried before the random ones.
  std::optional<std::vector<double>> initial;
  /// Objective value after every step of restart 0 (for monotonicity checks).
  std::vector<double>* trace = nullptr;
};

/// Alternating maximization: pattern from argmax, then top eigenvector, until
/// the pattern is a fixed point. Best over restarts.
KappaEstimate alt_max_kappa(const FamilyStructure& structure, const OrthoSystem& system,
                            const AltMaxOptions& options = {});
KappaEstimate alt_max_kappa(const FamilyStructure& structure, const FloatGrid& grid,
                            const AltMaxOptions& options = {});

enum class NuStrategy { kExhaustive, kRandom, kAnneal };

NuStrategy nu_strategy_from_string(const std::string& s);

struct NuOptions {
  NuStrategy strategy = NuStrategy::kAnneal;
  /// Number of permutation evaluations.
  std::size_t budget = 4000;
  std::uint64_t seed = 0;
  /// alt-max restarts per candidate permutation.
  int restarts = 2;
  /// Certificate at a smaller n whose permutation and coefficients seed the search.
  std::optional<KappaEstimate> warm_start;
};

/// Searches permutations sigma of h_1..h_n with G_m = {sigma(1..m)} for a
/// large kappa ratio; the best (sigma, a) is a lower-bound certificate.
KappaEstimate nu_search(std::size_t n, const NuOptions& options = {});

struct ModelFit {
  std::string name;  // "constant", "sqrt-log", "log"
  double coefficient = 0.0;
  double ssr = 0.0;
};

struct GrowthFit {
  std::vector<ModelFit> models;  // in order constant, sqrt-log, log
  std::string best;
  /// Model names from best to worst by residual.
  std::vector<std::string> ranking;
};

/// One-parameter least squares kappa ~ a g(n) with g in {1, sqrt(L), L},
/// L = log2(n + 1). Ties in residual go to the simpler model.
GrowthFit growth_fit(const std::vector<std::pair<double, double>>& points);

struct TransferResult {
  KappaEstimate estimate;
  double direct = 0.0;  // the Haar certificate that was transferred
  double delta_bound = 0.0;  // 2 eps n
  CertifiedFloat transferred;
  bool certified = false;
};

/// Moves a Haar lower-bound certificate to a complete target system via the
/// Lemma 1 construction and re-evaluates the transferred family exactly.
/// Failures of the construction give a flagged result, not an exception.
TransferResult transfer_kappa_lower(const OrthoSystem& target, const KappaEstimate& haar_certificate,
                                    const Rational& eps, const std::vector<long>& n_schedule);

}  // namespace mdlab
