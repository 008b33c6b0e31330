#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace glag {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t offset, std::string expected)
      : Error("parse error at offset " + std::to_string(offset) + ": expected " + expected),
        offset_(offset),
        expected_(std::move(expected)) {}

  std::size_t offset() const { return offset_; }
  const std::string& expected() const { return expected_; }

 private:
  std::size_t offset_;
  std::string expected_;
};

class UnboundVariable : public Error {
 public:
  explicit UnboundVariable(const std::string& name)
      : Error("unbound variable '" + name + "'"), name_(name) {}
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

/// Invalid input that is not a numerical failure: dimension mismatches,
/// malformed recipes, violated orthonormality assumptions.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class OrthonormalityViolation : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class NotUnit : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// Numerical failure at a specific point. `condition` names what went wrong,
/// `location` (filled in by the caller that knows it) names where.
class NumericalError : public Error {
 public:
  explicit NumericalError(std::string condition, std::string location = {})
      : Error(compose(condition, location)),
        condition_(std::move(condition)),
        location_(std::move(location)) {}

  const std::string& condition() const { return condition_; }
  const std::string& location() const { return location_; }
  bool has_location() const { return !location_.empty(); }

  /// Throws a copy of the same dynamic type carrying `location`.
  [[noreturn]] virtual void raise_at(const std::string& location) const {
    throw NumericalError(condition_, location);
  }

 private:
  static std::string compose(const std::string& c, const std::string& l) {
    return l.empty() ? c : c + " at " + l;
  }

  std::string condition_;
  std::string location_;
};

template <typename Derived>
class NumericalErrorKind : public NumericalError {
 public:
  using NumericalError::NumericalError;
  [[noreturn]] void raise_at(const std::string& location) const override {
    throw Derived(condition(), location);
  }
};

class DomainError : public NumericalErrorKind<DomainError> {
 public:
  using NumericalErrorKind::NumericalErrorKind;
};

class SingularMetric : public NumericalErrorKind<SingularMetric> {
 public:
  using NumericalErrorKind::NumericalErrorKind;
};

class NonFinite : public NumericalErrorKind<NonFinite> {
 public:
  using NumericalErrorKind::NumericalErrorKind;
};

class DegenerateDenominator : public NumericalErrorKind<DegenerateDenominator> {
 public:
  using NumericalErrorKind::NumericalErrorKind;
};

/// Runs `fn`; a NumericalError escaping it without a location gets `location()`
/// attached. The location is only formatted on failure.
template <typename Fn, typename Loc>
decltype(auto) at_location(Loc&& location, Fn&& fn) {
  try {
    return fn();
  } catch (const NumericalError& e) {
    if (e.has_location()) throw;
    e.raise_at(location());
    throw;  // not reached
  }
}

}  // namespace glag
