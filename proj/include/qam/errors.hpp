#pragma once

#include <stdexcept>
#include <string>

namespace qam {

// Point or parameter outside the domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Inversion target outside the image of the bracket.
class RangeError : public std::range_error {
 public:
  using std::range_error::range_error;
};

// The generator lacks a smoothness property the operation needs
// (e.g. a vanishing derivative where an Arrow-Pratt index is required).
class CapabilityError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// A caller-supplied object does not satisfy the operation's precondition.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Adaptive refinement ran out of budget. Carries the best estimate so far.
class AccuracyError : public std::runtime_error {
 public:
  AccuracyError(const std::string& what, double estimate)
      : std::runtime_error(what), estimate_(estimate) {}

  double estimate() const noexcept { return estimate_; }

 private:
  double estimate_;
};

}  // namespace qam
