#pragma once

#include <stdexcept>
#include <string>

namespace rumorloc {

// Root of the library's exception hierarchy. Catching Error catches
// everything thrown by rumorloc code on purpose.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed text input (edge lists, cascade files). Message carries the line number.
class ParseError : public Error {
public:
  using Error::Error;
};

// Input violates a documented type invariant (self-loop, nonpositive mean, ...).
class ValidationError : public Error {
public:
  using Error::Error;
};

// A referenced node/entity does not exist.
class NotFoundError : public Error {
public:
  using Error::Error;
};

// A parameter is outside its documented domain.
class ArgumentError : public Error {
public:
  using Error::Error;
};

// A sensor (or candidate) cannot be reached, so an observation or
// path statistic cannot be formed.
class CoverageError : public Error {
public:
  using Error::Error;
};

// A factorization or other numeric step failed (e.g. covariance not
// positive definite after regularization).
class NumericalError : public Error {
public:
  using Error::Error;
};

// An iterative solver hit its iteration cap before meeting tolerance.
class ConvergenceError : public Error {
public:
  using Error::Error;
};

// An equality-constrained problem has no feasible point.
class InfeasibleError : public Error {
public:
  using Error::Error;
};

// The input is degenerate for the requested operation (zero matrix, ...).
class DegenerateInputError : public Error {
public:
  using Error::Error;
};

// A partition has no inter-cluster edge, so no gateway graph exists.
class EmptyGatewayError : public Error {
public:
  using Error::Error;
};

// Reading or writing a file failed.
class IoError : public Error {
public:
  using Error::Error;
};

}  // namespace rumorloc
