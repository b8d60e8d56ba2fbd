// Copyright 2026 The mdlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>

namespace mdlab {

using Integer = mpz_class;
/// Arbitrary-precision rational; gmpxx keeps results in lowest terms with a
/// positive denominator.
using Rational = mpq_class;

Rational make_rational(long num, long den = 1);

/// Parses "p/q" or "p". Throws ValidationError on malformed text or a zero
/// denominator.
Rational parse_rational(std::string_view text);

/// Always renders "p/q", including "0/1" and "3/1".
std::string to_string(const Rational& r);

/// Exact conversion; every finite double is a dyadic rational.
Rational rational_from_double(double x);

double to_double(const Rational& r);

/// 2^e for any integer e.
Rational pow2(long e);

}  // namespace mdlab
