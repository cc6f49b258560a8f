#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace tbme {

/// Error categories; the numeric values double as CLI exit codes.
enum class ErrorKind : int { validation = 1, numerical = 2, io = 3 };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Malformed input or violated precondition. Row/column are 1-based file
/// coordinates when the error comes from a parsed file.
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what)
      : Error(ErrorKind::validation, what) {}
  ValidationError(const std::string& what, std::size_t row,
                  std::optional<std::size_t> column = std::nullopt)
      : Error(ErrorKind::validation, locate(what, row, column)),
        row_(row),
        column_(column) {}

  std::optional<std::size_t> row() const noexcept { return row_; }
  std::optional<std::size_t> column() const noexcept { return column_; }

 private:
  static std::string locate(const std::string& what, std::size_t row,
                            std::optional<std::size_t> column) {
    std::string loc = "row " + std::to_string(row);
    if (column) loc += ", column " + std::to_string(*column);
    return loc + ": " + what;
  }

  std::optional<std::size_t> row_;
  std::optional<std::size_t> column_;
};

/// Degenerate arithmetic: all likelihoods -inf, zero weighted variance,
/// non-finite model state.
class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what)
      : Error(ErrorKind::numerical, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::io, what) {}
};

}  // namespace tbme
