#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lsv {

/// Base class for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NonSquare : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// A pivot fell below the singularity threshold during LU factorization.
class SingularMatrix : public Error {
 public:
  using Error::Error;
};

class NumericallyDependent : public Error {
 public:
  NumericallyDependent(std::size_t index, const std::string& what)
      : Error(what), index_(index) {}
  /// Position of the first vector that is (numerically) in the span of its predecessors.
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

class InvalidDimension : public Error {
 public:
  using Error::Error;
};

class DegenerateGeometry : public Error {
 public:
  using Error::Error;
};

class InvalidQuery : public Error {
 public:
  using Error::Error;
};

class EnumerationTooLarge : public Error {
 public:
  using Error::Error;
};

class InsufficientData : public Error {
 public:
  using Error::Error;
};

}  // namespace lsv
