#pragma once

#include <stdexcept>
#include <string>

namespace mgb {

// Base of every error raised by the library. The CLI maps the concrete
// subclasses onto its exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class GraphErrorKind {
  kEmpty,
  kDisconnected,
  kLoop,
  kDuplicateEdge,
  kNonpositiveLength,
  kNonpositiveWeight,
  kNonfiniteValue,
  kUnknownEdge,
  kParse,
};

class GraphError : public Error {
 public:
  GraphError(GraphErrorKind kind, const std::string& what) : Error(what), kind_(kind) {}
  GraphErrorKind kind() const { return kind_; }

 private:
  GraphErrorKind kind_;
};

// Operands that live on different graphs, grids or levels.
class MismatchError : public Error {
 public:
  using Error::Error;
};

// Cole-Hopf logarithm of a non-positive heat solution.
class PositivityError : public Error {
 public:
  PositivityError(double time, double value, const std::string& what)
      : Error(what), time_(time), value_(value) {}
  double time() const { return time_; }
  double value() const { return value_; }

 private:
  double time_;
  double value_;
};

class SolverError : public Error {
 public:
  using Error::Error;
};

// A numerically checked inequality or identity did not hold.
class AssertionFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace mgb
