#pragma once

#include <stdexcept>
#include <string>

namespace pwsurv {

// Error kinds surfaced by the library. The CLI maps each to a stable
// machine-parsable tag (see `error_tag`).

class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Short tag naming the error kind of `e`, e.g. "invalid-argument".
std::string error_tag(const std::exception& e);

}  // namespace pwsurv
