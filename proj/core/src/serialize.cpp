// Copyright 2026 The mdlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "mdlab/serialize.hpp"

#include "mdlab/errors.hpp"

namespace mdlab {

Json to_json(const Rational& r) { return to_string(r); }

Rational rational_from_json(const Json& j) {
  if (j.is_string()) return parse_rational(j.get<std::string>());
  if (j.is_number_integer()) return Rational(Integer(j.dump()));
  throw ValidationError("expected a rational string, got " + j.dump());
}

Json to_json(const RadScalar& x) {
  Json out = Json::array();
  for (const auto& [r, q] : x.to_pairs()) out.push_back(Json::array({to_json(r), to_json(q)}));
  return out;
}

RadScalar rad_from_json(const Json& j) {
  if (j.is_string() || j.is_number_integer()) return RadScalar(rational_from_json(j));
  if (!j.is_array()) throw ValidationError("expected a list of [r, q] pairs, got " + j.dump());
  std::vector<std::pair<Rational, Rational>> pairs;
  for (const auto& p : j) {
    if (!p.is_array() || p.size() != 2) throw ValidationError("malformed [r, q] pair " + p.dump());
    Rational q = rational_from_json(p[1]);
    if (q < 0) throw ValidationError("negative radicand in " + p.dump());
    pairs.emplace_back(rational_from_json(p[0]), std::move(q));
  }
  return RadScalar::from_pairs(pairs);
}

Json to_json(const SimpleSet& s) {
  Json out = Json::array();
  for (const auto& iv : s.intervals()) out.push_back(Json::array({to_json(iv.lo), to_json(iv.hi)}));
  return out;
}

SimpleSet simple_set_from_json(const Json& j) {
  if (!j.is_array()) throw ValidationError("expected a list of intervals");
  std::vector<Interval> ivs;
  for (const auto& p : j) {
    if (!p.is_array() || p.size() != 2) throw ValidationError("malformed interval " + p.dump());
    ivs.emplace_back(rational_from_json(p[0]), rational_from_json(p[1]));
  }
  return SimpleSet(std::move(ivs));
}

Json to_json(const PCF& f) {
  Json br = Json::array();
  Json vals = Json::array();
  for (const auto& b : f.breaks()) br.push_back(to_json(b));
  for (const auto& v : f.values()) vals.push_back(to_json(v));
  return Json{{"breaks", br}, {"values", vals}};
}

PCF pcf_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("breaks") || !j.contains("values"))
    throw ValidationError("PCF JSON needs 'breaks' and 'values'");
  std::vector<Rational> br;
  std::vector<RadScalar> vals;
  for (const auto& b : j.at("breaks")) br.push_back(rational_from_json(b));
  for (const auto& v : j.at("values")) vals.push_back(rad_from_json(v));
  return PCF(std::move(br), std::move(vals));
}

double approx_of(const RadScalar& x) { return x.certify().value; }

}  // namespace mdlab
