// Copyright 2026 The mdlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <nlohmann/json.hpp>

#include "mdlab/pcf.hpp"
#include "mdlab/rad_scalar.hpp"
#include "mdlab/rational.hpp"
#include "mdlab/simple_set.hpp"

namespace mdlab {

using Json = nlohmann::ordered_json;

// Rationals are "p/q" strings, radical scalars lists of [r, q] pairs meaning
// sum r*sqrt(q). All parsers throw ValidationError on malformed input.

Json to_json(const Rational& r);
Rational rational_from_json(const Json& j);

Json to_json(const RadScalar& x);
RadScalar rad_from_json(const Json& j);

Json to_json(const SimpleSet& s);
SimpleSet simple_set_from_json(const Json& j);

Json to_json(const PCF& f);
PCF pcf_from_json(const Json& j);

/// Float rendering of an exact value, for human consumption next to the exact form.
double approx_of(const RadScalar& x);

}  // namespace mdlab
