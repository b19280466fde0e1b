#pragma once

#include <cstddef>
#include <stdexcept>
#include <cstdio>
#include <string>

namespace nsplat {

// Record or sequence is internally inconsistent (e.g. a tie group larger than
// the number of points alive at its contour).
class StructuralError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Chain or metadata text could not be parsed. `row()` is 1-based and counts
// the header as row 1; 0 means the error is not tied to a row.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t row, const std::string& what)
      : std::runtime_error(row == 0 ? what : "row " + std::to_string(row) + ": " + what),
        row_(row) {}

  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

// Rejection sampling gave up before finding a point above the contour.
class ContourExhausted : public std::runtime_error {
 public:
  explicit ContourExhausted(double level);

  double level() const noexcept { return level_; }

 private:
  double level_;
};

// A model does not provide an analytic quantity that was asked for.
class CapabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numerical integration or series evaluation did not reach its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double achieved)
      : std::runtime_error(what + " (achieved bound " + format_bound(achieved) + ")"),
        achieved_(achieved) {}

  double achieved() const noexcept { return achieved_; }

 private:
  static std::string format_bound(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
  }

  double achieved_;
};

}  // namespace nsplat
