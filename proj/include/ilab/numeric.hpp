#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace ilab {

/// Neumaier compensated accumulator.
class CompensatedSum {
public:
  void add(double x) {
    double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Hurwitz zeta sum_{n>=0} (n+q)^{-s} for s > 1, q > 0 (Euler-Maclaurin).
double hurwitz_zeta(double s, double q);

/// Sum_{n>=n0} n^{-s}, s > 1, n0 >= 1.
double power_tail_sum(double s, double n0);

/// Up to `count` distinct integers spaced logarithmically in [lo, hi].
std::vector<std::size_t> log_spaced_indices(std::size_t lo, std::size_t hi, std::size_t count);

/// Ordinary least squares y = a + b x. Returns {b, a, stderr(b), r^2, sse}.
struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double stderr_slope = 0.0;
  double r_squared = 0.0;
  double sse = 0.0;
};
LinearFit least_squares(const std::vector<double>& x, const std::vector<double>& y);

/// splitmix64 step: advances state and returns the mixed output.
std::uint64_t splitmix64_next(std::uint64_t& state);
/// The splitmix64 finalizer applied to a single value.
std::uint64_t splitmix64_mix(std::uint64_t z);

/// Deterministic 64-bit generator built on splitmix64.
class SplitMix64 {
public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next() { return splitmix64_next(state_); }
  /// Uniform double in [0,1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  /// Uniform double in (0,1).
  double uniform_open() {
    return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
  }

private:
  std::uint64_t state_;
};

}  // namespace ilab
