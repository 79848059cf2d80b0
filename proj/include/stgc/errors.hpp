#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace stgc {

/// Shape or size disagreement between operands.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Invalid graph input (bad index, self loop, asymmetric or negative weights).
class GraphError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A stability or model precondition does not hold for the given parameters.
class PreconditionError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// An iterative procedure ran out of iterations. Carries the last residual.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : std::runtime_error(what + " (residual " + std::to_string(residual) + ")"),
        residual_(residual) {}

  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// Malformed or truncated file. `offset` is a byte offset, `line` is 1-based
/// when the failure happened inside the text part of a format (0 otherwise).
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& what, std::size_t offset, std::size_t line = 0)
      : std::runtime_error(what + " at byte " + std::to_string(offset) +
                           (line ? " (line " + std::to_string(line) + ")" : std::string())),
        offset_(offset),
        line_(line) {}

  std::size_t offset() const noexcept { return offset_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t offset_;
  std::size_t line_;
};

/// Training produced a non-finite loss.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace stgc
