// Copyright 2026 The mdlab Authors
// SPDX-License-Identifier: Apache-2.0

#include <filesystem>

#include "cli_internal.hpp"
#include "mdlab/errors.hpp"

namespace mdlab::cli {

namespace {

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else if (c != ' ') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

int parse_int(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ValidationError("bad " + what + " '" + s + "'");
  }
}

int parse_depth(const std::string& s) {
  const int d = parse_int(s, "depth");
  if (d < 0 || d > 20) throw ValidationError("depth must be in 0..20");
  return d;
}

}  // namespace

OrthoSystem system_from_spec(const std::string& spec, std::uint64_t seed) {
  const auto parts = split(spec, ':');
  const std::string& kind = parts[0];
  if (kind == "classical" && parts.size() == 2)
    return classical_haar(std::size_t{1} << parse_depth(parts[1]));
  if (kind == "rademacher" && parts.size() == 2) {
    const int n = parse_int(parts[1], "count");
    if (n < 1 || n > 24) throw ValidationError("rademacher count must be in 1..24");
    return rademacher(static_cast<std::size_t>(n));
  }
  if (kind == "generalized" && parts.size() == 3)
    return generalized_haar(SplitTree::uniform_ratio(parse_depth(parts[2]), parse_rational(parts[1])));
  if (kind == "random" && parts.size() == 3)
    return generalized_haar(SplitTree::random(parse_depth(parts[2]), seed, parse_int(parts[1], "denominator")));
  if (kind == "unbalanced" && parts.size() == 2)
    return generalized_haar(SplitTree(parse_depth(parts[1]), [](int level, std::size_t) {
      return level < 3 ? Rational(1, 2) : Rational(1, 4);
    }));
  if (std::filesystem::exists(spec)) return ortho_system_from_json(read_json_file(spec));
  throw ValidationError("unknown system '" + spec +
                        "' (classical:D, rademacher:N, generalized:RATIO:D, random:DENOM:D, unbalanced:D "
                        "or a system file)");
}

std::vector<Rational> rational_list(const std::string& text) {
  std::vector<Rational> out;
  for (const auto& s : split(text, ',')) out.push_back(parse_rational(s));
  return out;
}

std::vector<long> long_list(const std::string& text) {
  std::vector<long> out;
  for (const auto& s : split(text, ',')) out.push_back(parse_int(s, "integer"));
  return out;
}

SimpleSet simple_set_from_spec(const std::string& text) {
  std::vector<Interval> iv;
  for (const auto& piece : split(text, ';')) {
    const auto ends = split(piece, ',');
    if (ends.size() != 2) throw ValidationError("intervals are written lo,hi: '" + piece + "'");
    iv.emplace_back(parse_rational(ends[0]), parse_rational(ends[1]));
  }
  return SimpleSet(std::move(iv));
}

Partition partition_from_spec(const std::string& text) {
  if (std::filesystem::exists(text)) return partition_from_json(read_json_file(text));
  std::vector<SimpleSet> blocks;
  for (const auto& b : split(text, '|')) blocks.push_back(simple_set_from_spec(b));
  return Partition(std::move(blocks));
}

std::vector<Rational> eps_from_spec(const std::string& text, std::size_t count) {
  std::vector<Rational> out;
  for (std::size_t k = 1; k <= count; ++k) {
    const long kk = static_cast<long>(k);
    if (text == "2^-k-1")
      out.push_back(pow2(-kk - 1));
    else if (text == "2^-k")
      out.push_back(pow2(-kk));
    else if (text.rfind("2^-", 0) == 0)
      out.push_back(pow2(-parse_int(text.substr(3), "exponent")));
    else
      out.push_back(parse_rational(text));
    if (out.back() <= 0) throw ValidationError("eps must be positive");
  }
  return out;
}

}  // namespace mdlab::cli
