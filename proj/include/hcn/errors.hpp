#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace hcn {

/// Argument outside the mathematical domain of a kernel (e.g. log_gamma(0)).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A series or iteration hit its term cap before meeting its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A violated model invariant. field() names the offending input.
class ValidationError : public std::invalid_argument {
 public:
  ValidationError(std::string field, const std::string& what)
      : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Operation called outside its stated precondition (e.g. the alpha = 4 closed forms).
class PreconditionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace hcn
