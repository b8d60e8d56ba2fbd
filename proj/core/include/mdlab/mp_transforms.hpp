// Copyright 2026 The mdlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mdlab/pcf.hpp"
#include "mdlab/rational.hpp"
#include "mdlab/serialize.hpp"
#include "mdlab/simple_set.hpp"

namespace mdlab {

/// x -> slope * x + offset on `source`.
struct AffinePiece {
  Interval source;
  Rational slope;
  Rational offset;

  Rational apply(const Rational& x) const { return slope * x + offset; }
  Interval image() const { return Interval(apply(source.lo), apply(source.hi)); }
  friend bool operator==(const AffinePiece& a, const AffinePiece& b) {
    return a.source == b.source && a.slope == b.slope && a.offset == b.offset;
  }
};

/// Piecewise-affine increasing-on-pieces map. Usually total on [0,1); maps
/// such as xi_a carry a smaller domain, recorded explicitly.
class PwAffineMap {
 public:
  /// The identity on [0,1).
  PwAffineMap();
  /// Validates that sources are disjoint, sorted after canonicalization, cover
  /// `domain` exactly, slopes are positive and images stay inside [0,1).
  explicit PwAffineMap(std::vector<AffinePiece> pieces,
                       std::optional<SimpleSet> domain = std::nullopt);

  static PwAffineMap identity() { return PwAffineMap(); }

  const std::vector<AffinePiece>& pieces() const { return pieces_; }
  const SimpleSet& domain() const { return domain_; }
  bool is_total() const { return total_; }

  Rational operator()(const Rational& x) const;
  /// Exact preimage of a simple set (restricted to the domain).
  SimpleSet preimage(const SimpleSet& s) const;
  /// Exact image of a simple set contained in the domain.
  SimpleSet image(const SimpleSet& s) const;
  /// Exact global check: for every image cell, sum of 1/slope over pieces
  /// covering it equals 1, and the domain is [0,1).
  bool is_measure_preserving() const;
  /// Density of the pushforward of Lebesgue measure: sum of 1/slope over pieces
  /// whose image covers each point.
  PCF pushforward_density() const;

  friend bool operator==(const PwAffineMap& a, const PwAffineMap& b) {
    return a.pieces_ == b.pieces_ && a.domain_ == b.domain_;
  }

 private:
  std::vector<AffinePiece> pieces_;
  SimpleSet domain_;
  bool total_ = true;
};

/// Finite partition of [0,1) into simple sets of positive measure.
class Partition {
 public:
  Partition() : blocks_{SimpleSet::unit()} {}
  /// Throws ValidationError if blocks overlap, are null or fail to cover [0,1).
  explicit Partition(std::vector<SimpleSet> blocks);

  const std::vector<SimpleSet>& blocks() const { return blocks_; }
  std::size_t size() const { return blocks_.size(); }
  /// Index of the block containing x.
  std::size_t block_of(const Rational& x) const;

 private:
  std::vector<SimpleSet> blocks_;
};

/// Order-preserving bijection a -> [0,1), x -> |[0,x) ∩ a| / |a|.
PwAffineMap xi_map(const SimpleSet& a);
/// Inverse of xi_map: [0,1) -> a.
PwAffineMap xi_inverse(const SimpleSet& a);
/// x -> {n x}.
PwAffineMap eta_map(long n);
/// xi_a^{-1} o eta_n o xi_a on a, identity off a.
PwAffineMap u_map(const SimpleSet& a, long n);
/// u_{a_j, n} on each block a_j.
PwAffineMap u_partition_map(const Partition& partition, long n);
/// outer o inner. The image of inner must lie in the domain of outer.
PwAffineMap compose(const PwAffineMap& outer, const PwAffineMap& inner);
/// f o tau.
PCF pullback(const PCF& f, const PwAffineMap& tau);

struct ProbeResult {
  SimpleSet probe;
  Rational measure;
  Rational preimage_measure;
  bool pass = true;
};

struct MeasureReport {
  bool pass = true;
  std::size_t probes = 0;
  std::size_t failures = 0;
  /// Failing probes only.
  std::vector<ProbeResult> violations;
};

MeasureReport check_measure_preserving(const PwAffineMap& tau, const std::vector<SimpleSet>& probes);
/// Every dyadic interval [k 2^-j, (k+1) 2^-j) with 0 <= j <= resolution.
std::vector<SimpleSet> dyadic_probes(int resolution);

struct CorrelationRow {
  long n = 0;
  RadScalar value;
  RadScalar target;
  RadScalar gap;
};

/// Integral of f(u_{A,n}(x)) g(x) for each n against the limit
/// sum_j (1/|a_j|) (int_{a_j} f)(int_{a_j} g).
std::vector<CorrelationRow> correlation_limit(const PCF& f, const PCF& g, const Partition& a,
                                              const std::vector<long>& n_list);
RadScalar correlation_target(const PCF& f, const PCF& g, const Partition& a);

Json to_json(const PwAffineMap& tau);
PwAffineMap pw_affine_from_json(const Json& j);
Json to_json(const Partition& p);
Partition partition_from_json(const Json& j);

}  // namespace mdlab
