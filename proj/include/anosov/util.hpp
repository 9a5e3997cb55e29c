#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace anosov {

// 2*pi split into a double-double pair; the two parts together carry ~32
// significant digits, which keeps angle reduction honest even after the
// exact integer matrix powers produce coordinates of size ~1e13.
inline constexpr double kTwoPi = 6.283185307179586;
inline constexpr double kTwoPiLo = 2.4492935982947064e-16;

// Unevaluated double-double sum: value = hi + lo with |lo| <= ulp(hi)/2.
struct DD {
  double hi = 0.0;
  double lo = 0.0;
};

inline DD two_sum(double a, double b) {
  double s = a + b;
  double bb = s - a;
  double err = (a - (s - bb)) + (b - bb);
  return {s, err};
}

// Requires |a| >= |b| (or a == 0).
inline DD quick_two_sum(double a, double b) {
  double s = a + b;
  return {s, b - (s - a)};
}

inline DD two_prod(double a, double b) {
  double p = a * b;
  return {p, std::fma(a, b, -p)};
}

inline DD dd_add(DD a, DD b) {
  DD s = two_sum(a.hi, b.hi);
  return quick_two_sum(s.hi, s.lo + a.lo + b.lo);
}

inline DD dd_add(DD a, double b) {
  DD s = two_sum(a.hi, b);
  return quick_two_sum(s.hi, s.lo + a.lo);
}

inline DD dd_neg(DD a) { return {-a.hi, -a.lo}; }

// Reduces the double-double value x into [0, 2*pi). The quotient is formed
// from the high part only; the trailing boundary guards absorb the possible
// off-by-one.
double dd_wrap_two_pi(DD x);

// Plain-double convenience wrapper around dd_wrap_two_pi.
inline double wrap_angle(double x) { return dd_wrap_two_pi({x, 0.0}); }

// Integer power by binary exponentiation; negative exponents go through the
// reciprocal so that sign flips of the base flip the result exactly.
inline double ipow(double base, long long e) {
  if (e < 0) return 1.0 / ipow(base, -e);
  double r = 1.0;
  double b = base;
  while (e > 0) {
    if (e & 1) r *= b;
    e >>= 1;
    if (e > 0) b *= b;
  }
  return r;
}

// Neumaier-compensated accumulator. Summation order is part of the result
// contract: every series in this project is accumulated in its enumeration
// order so that runs are bit-reproducible.
struct KahanSum {
  double sum = 0.0;
  double comp = 0.0;

  void add(double x) {
    double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
      comp += (sum - t) + x;
    } else {
      comp += (x - t) + sum;
    }
    sum = t;
  }

  double value() const { return sum + comp; }
};

// Deterministic random angles: the mapping from engine output to double is
// spelled out here instead of going through std::uniform_real_distribution,
// whose stream is not pinned by the standard.
class AngleRng {
 public:
  explicit AngleRng(std::uint64_t seed) : eng_(seed) {}

  // Uniform in [0, 1), 53 random bits.
  double unit() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  // Uniform in [0, 2*pi).
  double angle() { return unit() * kTwoPi; }

  std::uint64_t raw() { return eng_(); }

 private:
  std::mt19937_64 eng_;
};

// Least-squares slope of y against x. Throws ValidationError for fewer than
// two points or zero x-variance.
double least_squares_slope(const std::vector<double>& x,
                           const std::vector<double>& y);

// Least-squares slope of log|y| against log|x| (the decay order of y ~ x^s).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

// Number of worker threads: ANOSOV_THREADS if set and positive, otherwise
// (including ANOSOV_THREADS=0) the hardware concurrency.
int worker_count();

// Runs body(i) for i in [0, n). Each call must only touch its own output
// slot; results are then identical to the serial loop regardless of the
// worker count. Exceptions from workers are rethrown on the calling thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace anosov
