#pragma once

#include <stdexcept>
#include <string>

namespace capcount {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Vector or matrix sizes do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// An argument is outside the operation's domain (nonpositive point,
// negative coefficient, malformed family, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// The requested combination of polynomial and family has no certified path.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

// A desk-scale enumeration exceeded its limit.
class LimitError : public Error {
 public:
  LimitError(const std::string& what, long long partial_count)
      : Error(what), partial_count_(partial_count) {}
  long long partial_count() const { return partial_count_; }

 private:
  long long partial_count_;
};

// Univariate interpolation was too ill-conditioned to trust.
class ConditioningError : public Error {
 public:
  ConditioningError(const std::string& what, double condition)
      : Error(what), condition_(condition) {}
  double condition() const { return condition_; }

 private:
  double condition_;
};

}  // namespace capcount
