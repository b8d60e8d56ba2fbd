// Copyright 2026 The mdlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace mdlab {

/// Malformed input: bad intervals, non-partitions, schema violations.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Input outside an operation's mathematical domain (empty set, n = 0, zero norm).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// An exact comparison could not be decided within the configured precision budget.
class PrecisionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A search or enumeration was refused or cut short by its budget.
class BudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mdlab
