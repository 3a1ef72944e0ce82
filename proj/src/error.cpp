#include "spdpool/error.hpp"

namespace spdpool {

FormatError::FormatError(const std::string& what, std::size_t row, std::size_t column)
    : Error(what + " (row " + std::to_string(row) + ", column " + std::to_string(column) + ")"),
      row_(row),
      column_(column) {}

FormatError::FormatError(const std::string& what) : Error(what) {}

}  // namespace spdpool
