#pragma once

#include <stdexcept>
#include <string>

namespace stableweb {

// Bad argument to an operation (precondition violated by the caller).
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Evaluation point outside a function's domain.
class DomainError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// Unknown identifier (cluster id, experiment name, ...).
class LookupError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// A Monte-Carlo experiment could not produce a meaningful estimate.
class ExperimentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace stableweb
