#pragma once

#include <stdexcept>
#include <string>

namespace polytoep {

/// Malformed or out-of-contract input: parse errors, dimension mismatches,
/// violated preconditions. Maps to CLI exit code 2.
class invalid_input : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A requested accuracy cannot be met within the configured expansion or
/// scan budget. Maps to CLI exit code 3.
class budget_exceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The symbol or matrix is certifiably not a partial isometry (or not a
/// power partial isometry). Maps to CLI exit code 1.
class not_partial_isometry : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A numerical procedure produced a structurally inconsistent result
/// (e.g. non-orthonormal chains). Maps to CLI exit code 3.
class numeric_failure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace polytoep
