// Copyright 2026 the ilda authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace ilda {

/// Malformed input data: corpus files, checkpoints, wire frames.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration or argument ranges, detected before any work starts.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// API misuse: mismatched document ids, missing local state, indices out of range.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Non-finite values or divergence detected during inference.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Expected-count bookkeeping went negative beyond rounding noise.
/// This signals a bug in delta accounting, not an unlucky input.
class StatisticsCorruptionError : public NumericError {
 public:
  using NumericError::NumericError;
};

/// A distributed run failed: a worker crashed or the protocol stalled
/// past its grace period.
class RunError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ilda
