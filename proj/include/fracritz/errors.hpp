#pragma once

#include <stdexcept>
#include <string>

namespace fracritz {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of a function (e.g. gamma(x<=0)).
class DomainError : public Error {
 public:
  using Error::Error;
};

class OverflowError : public Error {
 public:
  using Error::Error;
};

/// Evaluation at the anchor endpoint of a term with negative exponent.
class SingularityError : public Error {
 public:
  using Error::Error;
};

/// Invalid arguments or inconsistent inputs to an operation.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// The quadrature integrand returned a non-finite value.
class IntegrationError : public Error {
 public:
  IntegrationError(const std::string& what, double node)
      : Error(what), node_(node) {}
  double node() const noexcept { return node_; }

 private:
  double node_;
};

}  // namespace fracritz
