// Copyright 2026 The mdlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mdlab/mp_transforms.hpp"
#include "mdlab/pcf.hpp"
#include "mdlab/serialize.hpp"

namespace mdlab {

/// Complete binary tree of intervals rooted at [0,1), nodes in breadth-first
/// order (children of node b are 2b+1 and 2b+2). Internal nodes carry a
/// rational split point strictly inside their interval and a sign in {+1,-1}.
class SplitTree {
 public:
  struct Node {
    Interval interval;
    std::optional<Rational> split;  // set on internal nodes
    int sign = 1;
  };

  /// Split ratio (relative position of the split inside a node) for node
  /// `index` at `level` (root is level 0, index counted within the level).
  using RatioFn = std::function<Rational(int level, std::size_t index)>;

  /// `depth` levels of splits, 2^depth leaves.
  SplitTree(int depth, const RatioFn& ratio);

  static SplitTree midpoint(int depth);
  static SplitTree uniform_ratio(int depth, const Rational& ratio);
  /// Ratios drawn uniformly from {1/d, ..., (d-1)/d}.
  static SplitTree random(int depth, std::uint64_t seed, int denominator = 8);
  /// Explicit split points per internal node in breadth-first order.
  static SplitTree from_splits(int depth, const std::vector<Rational>& splits);

  /// Copy with node signs replaced (one per internal node, breadth-first).
  SplitTree with_signs(const std::vector<int>& signs) const;

  int depth() const { return depth_; }
  std::size_t internal_nodes() const { return (std::size_t{1} << depth_) - 1; }
  const std::vector<Node>& nodes() const { return nodes_; }
  /// Longest leaf interval at each level 0..depth.
  std::vector<Rational> max_length_per_level() const;

 private:
  SplitTree() = default;
  int depth_ = 0;
  std::vector<Node> nodes_;
};

/// Nested partitions A_1, A_2, ...; every block of A_{n+1} lies in a block of A_n.
class Filtration {
 public:
  Filtration() = default;
  /// Throws ValidationError if a level is not a refinement of its predecessor.
  explicit Filtration(std::vector<Partition> levels);

  std::size_t size() const { return levels_.size(); }
  /// Level n, 1-based.
  const Partition& level(std::size_t n) const { return levels_.at(n - 1); }
  /// Indices into level n+1 of the children of block `block` of level n.
  const std::vector<std::size_t>& children(std::size_t n, std::size_t block) const {
    return children_.at(n - 1).at(block);
  }
  /// Whether every block of every level is a single interval.
  bool interval_blocks() const;

 private:
  std::vector<Partition> levels_;
  std::vector<std::vector<std::vector<std::size_t>>> children_;
};

enum class SystemKind { kClassicalHaar, kGeneralizedHaar, kRademacher, kMd, kTransformed, kCustom };

std::string to_string(SystemKind kind);
SystemKind system_kind_from_string(const std::string& s);

/// Indexed family f_1, f_2, ... of PCFs. Indices in the public API are
/// 1-based, matching h_1 = 1.
struct OrthoSystem {
  SystemKind kind = SystemKind::kCustom;
  std::vector<PCF> functions;
  std::optional<SplitTree> tree;
  std::optional<Filtration> filtration;
  bool normalized = true;

  std::size_t size() const { return functions.size(); }
  const PCF& at(std::size_t k) const { return functions.at(k - 1); }
  bool is_haar() const {
    return kind == SystemKind::kClassicalHaar || kind == SystemKind::kGeneralizedHaar;
  }
};

/// Haar functions of a split tree: f_1 = 1 and f_{b+2} for internal node b,
/// +sqrt(beta/(alpha(alpha+beta))) on the left child of length alpha and
/// -sqrt(alpha/(beta(alpha+beta))) on the right child of length beta.
/// `count` limits the number of functions (default: all 2^depth). The
/// filtration has count levels holding O(count^2) blocks in total, so it is
/// attached only when count <= filtration_limit.
OrthoSystem generalized_haar(const SplitTree& tree, std::optional<std::size_t> count = std::nullopt,
                             std::size_t filtration_limit = 256);
/// h_1 = 1, h_{2^j+i} = 2^{j/2} (1 on the left half, -1 on the right half) of
/// [(i-1) 2^-j, i 2^-j).
OrthoSystem classical_haar(std::size_t count, std::size_t filtration_limit = 256);
/// r_k = +1 / -1 alternately on dyadic intervals of length 2^-k; count <= 24.
/// Level n of the filtration is the dyadic partition into 2^n cells.
OrthoSystem rademacher(std::size_t count, std::size_t filtration_limit = 16);
/// Filtration A_1 = {[0,1)}, A_n = A_{n-1} with internal node n-2 split.
Filtration haar_filtration(const SplitTree& tree, std::size_t levels);
/// f_k o tau for every k. The filtration is replaced by its preimage under
/// tau, or kept as is when `pull_back_filtration` is false (verify_md then
/// tells whether tau respects the original filtration).
OrthoSystem transform_system(const OrthoSystem& system, const PwAffineMap& tau,
                             bool pull_back_filtration = true);

struct MdViolation {
  std::size_t index = 0;
  /// 1: not constant on a level-n block; 2: nonzero mean on a level-(n-1)
  /// block; 3: Gram entry wrong; 4: leaf indicator not reconstructed.
  int condition = 0;
  SimpleSet witness;
  std::string detail;
};

struct MdReport {
  bool constant_ok = true;
  bool mean_zero_ok = true;
  bool orthonormal_ok = true;
  std::optional<bool> complete_ok;
  std::size_t gram_size = 0;
  std::vector<MdViolation> violations;
  bool pass() const {
    return constant_ok && mean_zero_ok && orthonormal_ok && complete_ok.value_or(true);
  }
};

/// Checks conditions (1) and (2) of a martingale difference against the
/// filtration, the Gram matrix of the first min(size, gram_limit) functions,
/// and for Haar kinds reconstructs every block indicator of the last level.
MdReport verify_md(const OrthoSystem& system, std::size_t gram_limit = 64);

/// Whether f is constant on s; stores the value when it is.
bool constant_on(const PCF& f, const SimpleSet& s, RadScalar* value = nullptr);

struct Expansion {
  std::vector<RadScalar> coefficients;  // c_1..c_upto
  PCF reconstruction;
  RadScalar residual;  // ||f||^2 - sum c_i^2
};

Expansion expand(const PCF& f, const OrthoSystem& system, std::size_t upto);

/// Polynomials over pairwise disjoint index sets of a base system.
class NonOverlapFamily {
 public:
  NonOverlapFamily() = default;
  /// Throws ValidationError when two sets share an index, an index is zero or
  /// sizes mismatch.
  NonOverlapFamily(std::vector<std::vector<std::size_t>> sets,
                   std::vector<std::vector<RadScalar>> coeffs);
  /// Skips the disjointness check; for negative controls.
  static NonOverlapFamily unchecked(std::vector<std::vector<std::size_t>> sets,
                                    std::vector<std::vector<RadScalar>> coeffs);
  /// Consecutive windows (start_k, start_{k+1}] of the base system.
  static NonOverlapFamily windows(const std::vector<std::size_t>& bounds,
                                  const std::vector<RadScalar>& coeffs);

  std::size_t size() const { return sets_.size(); }
  const std::vector<std::vector<std::size_t>>& sets() const { return sets_; }
  const std::vector<std::vector<RadScalar>>& coeffs() const { return coeffs_; }
  PCF polynomial(std::size_t k, const OrthoSystem& system) const;
  /// sum_j c_j^2 over set k; equals ||p_k||^2 for an orthonormal base.
  RadScalar norm_sq(std::size_t k) const;

 private:
  std::vector<std::vector<std::size_t>> sets_;
  std::vector<std::vector<RadScalar>> coeffs_;
};

struct QuadrupleHit {
  std::size_t n[4];
  RadScalar integral;
};

struct QuadrupleReport {
  std::size_t trials = 0;
  std::size_t nonzero = 0;
  std::vector<QuadrupleHit> hits;
};

/// Exact integral of p_a p_b p_c p_d for random distinct (a,b,c,d).
QuadrupleReport quadruple_check(const NonOverlapFamily& family, const OrthoSystem& system,
                                std::size_t trials, std::uint64_t seed);

Json to_json(const OrthoSystem& system);
OrthoSystem ortho_system_from_json(const Json& j);

}  // namespace mdlab
