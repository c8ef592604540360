#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace multipac {

// Base class for every error thrown by the library, so callers can catch
// library failures separately from std::logic_error and friends.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Structural problems in inputs: masses that do not sum to one, mismatched
// domain sizes, empty hypothesis lists, malformed weights.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// A loss that requires {0,1}-valued classifiers was handed a predictor with
// some other value.
class NonBinaryPredictor : public Error {
 public:
  using Error::Error;
};

// check_unambiguity / derive_f found more than one minimizer.
class Ambiguous : public Error {
 public:
  using Error::Error;
};

// Requested a uniform-convergence bound for a loss kind that has none.
class NoUniformConvergence : public Error {
 public:
  using Error::Error;
};

// An operation was asked to work on an empty sample.
class EmptySample : public Error {
 public:
  using Error::Error;
};

// A distinguisher was fed a tuple whose length differs from its arity k.
class WrongArity : public Error {
 public:
  using Error::Error;
};

// Instance (de)serialization failures; `what()` names the offending line or
// field.
class ParseError : public Error {
 public:
  using Error::Error;
};

// File system failures while reading or writing artifacts.
class IOFailure : public Error {
 public:
  using Error::Error;
};

// Brute-force oracle refused to enumerate a candidate space this large.
class TooLarge : public Error {
 public:
  using Error::Error;
};

// The OI learner ran out of sample budget before its audits passed. Carries
// the names of the distinguishers that were still failing, as an
// incompatibility witness.
class BudgetExhausted : public Error {
 public:
  BudgetExhausted(const std::string& what, std::vector<std::string> failing)
      : Error(what), failing_(std::move(failing)) {}
  const std::vector<std::string>& failing() const { return failing_; }

 private:
  std::vector<std::string> failing_;
};

}  // namespace multipac
