#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace spdpool {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument (shape, range, admissible value) was violated.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A file did not parse under its declared format.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t row, std::size_t column);
  explicit FormatError(const std::string& what);

  // 1-based; zero when the error has no cell location.
  std::size_t row() const noexcept { return row_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t row_ = 0;
  std::size_t column_ = 0;
};

/// A numerical routine could not produce a valid result
/// (indefinite matrix, singular logdet, non-convergence, divergence).
class NumericalError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace spdpool
