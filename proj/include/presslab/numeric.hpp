#pragma once

#include <cmath>
#include <limits>

namespace presslab {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Neumaier-compensated accumulator. Deterministic for a fixed add order.
class CompensatedSum {
 public:
  void add(double x) {
    double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  void scale(double a) {
    sum_ *= a;
    comp_ *= a;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// Streaming log-sum-exp: value() = log(sum of exp(v_i)). Rescales against the
// running max so no intermediate overflows; the sum itself is compensated.
// Empty accumulator yields -inf. Order of add() calls is part of the contract.
class LogSumExp {
 public:
  void add(double v) {
    if (v == kNegInf) return;
    if (max_ == kNegInf) {
      max_ = v;
      sum_.add(1.0);
      return;
    }
    if (v <= max_) {
      sum_.add(std::exp(v - max_));
    } else {
      sum_.scale(std::exp(max_ - v));
      sum_.add(1.0);
      max_ = v;
    }
  }
  double value() const {
    if (max_ == kNegInf) return kNegInf;
    return max_ + std::log(sum_.value());
  }

 private:
  double max_ = kNegInf;
  CompensatedSum sum_;
};

inline bool close_abs(double a, double b, double tol) { return std::abs(a - b) <= tol; }

}  // namespace presslab
