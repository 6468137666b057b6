#pragma once

// Reference implementations used only by tests. They are written
// independently of the library code (different algorithms, extended
// precision) so that agreement means something.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace oracle {

inline double kahan_sum(std::span<const double> x) {
  double sum = 0.0, comp = 0.0;
  for (double v : x) {
    const double y = v - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  return sum;
}

// Iterate dO <- AC dE + AB dO from zero until it stops moving.
inline double fixed_point_response(double a, double b, double c, double dE) {
  long double x = 0.0L;
  const long double ab = static_cast<long double>(a) * b;
  const long double drive = static_cast<long double>(a) * c * dE;
  for (int k = 0; k < 100000; ++k) {
    const long double next = drive + ab * x;
    if (next == x) break;
    x = next;
  }
  return static_cast<double>(x);
}

inline double order_parameter(std::span<const double> ds) {
  long double num = 0.0L, den = 0.0L;
  for (double v : ds) {
    num += v;
    den += std::fabs(static_cast<long double>(v));
  }
  return den == 0.0L ? 0.0 : static_cast<double>(std::fabs(num) / den);
}

// Textbook single-pass Pearson in long double.
inline double correlation(std::span<const double> x, std::span<const double> y) {
  const auto n = static_cast<long double>(x.size());
  long double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const long double a = x[k], b = y[k];
    sx += a;
    sy += b;
    sxx += a * a;
    syy += b * b;
    sxy += a * b;
  }
  const long double cov = sxy / n - (sx / n) * (sy / n);
  const long double vx = sxx / n - (sx / n) * (sx / n);
  const long double vy = syy / n - (sy / n) * (sy / n);
  if (vx <= 0 || vy <= 0) return 0.0;
  return static_cast<double>(cov / std::sqrt(vx * vy));
}

inline double stddev(std::span<const double> x) {
  long double m = 0;
  for (double v : x) m += v;
  m /= static_cast<long double>(x.size());
  long double s = 0;
  for (double v : x) s += (v - m) * (v - m);
  return static_cast<double>(std::sqrt(s / static_cast<long double>(x.size())));
}

// Small helper for hand-rolled property generators.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : eng_(seed) {}
  double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(eng_); }
  std::size_t count(std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(eng_);
  }
  bool coin() { return count(0, 1) == 1; }
  std::vector<double> reals(std::size_t n, double lo, double hi) {
    std::vector<double> out(n);
    for (auto& v : out) v = real(lo, hi);
    return out;
  }
  std::mt19937_64& engine() { return eng_; }

 private:
  std::mt19937_64 eng_;
};

}  // namespace oracle
