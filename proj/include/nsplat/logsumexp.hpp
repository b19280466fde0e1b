#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

namespace nsplat {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log(exp(a) + exp(b)), exact for -inf arguments.
inline double logaddexp(double a, double b) {
  if (a < b) std::swap(a, b);
  if (b == kNegInf) return a;
  return a + std::log1p(std::exp(b - a));
}

// Streaming log-sum-exp. Keeps a running maximum and a scaled sum, so one
// exp per term in the common case.
class LogSumExp {
 public:
  void add(double term) {
    if (term == kNegInf) return;
    if (term > max_) {
      sum_ = (max_ == kNegInf ? 0.0 : sum_ * std::exp(max_ - term)) + 1.0;
      max_ = term;
    } else {
      sum_ += std::exp(term - max_);
    }
  }

  double value() const { return max_ == kNegInf ? kNegInf : max_ + std::log(sum_); }

 private:
  double max_ = kNegInf;
  double sum_ = 0.0;
};

inline double logsumexp(std::span<const double> terms) {
  LogSumExp acc;
  for (double t : terms) acc.add(t);
  return acc.value();
}

// log(1 - exp(x)) for x <= 0.
inline double log1mexp(double x) {
  return x > -0.6931471805599453 ? std::log(-std::expm1(x)) : std::log1p(-std::exp(x));
}

}  // namespace nsplat
