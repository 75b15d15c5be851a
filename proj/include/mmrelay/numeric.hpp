#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace mmrelay {

/// Neumaier's variant of Kahan summation. Unlike plain Kahan it stays exact
/// when an addend is larger in magnitude than the running sum, which happens
/// routinely when binomial weights of very different size are mixed.
class CompensatedSum {
 public:
  CompensatedSum() = default;
  explicit CompensatedSum(double initial) : sum_(initial) {}

  CompensatedSum& operator+=(double value) {
    const double t = sum_ + value;
    if (std::fabs(sum_) >= std::fabs(value)) {
      compensation_ += (sum_ - t) + value;
    } else {
      compensation_ += (value - t) + sum_;
    }
    sum_ = t;
    return *this;
  }

  CompensatedSum& operator-=(double value) { return *this += -value; }

  double value() const { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

inline double binomial_coefficient(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  if (k > n - k) k = n - k;
  double c = 1.0;
  for (int i = 1; i <= k; ++i) {
    c = c * static_cast<double>(n - k + i) / static_cast<double>(i);
  }
  return std::round(c);
}

/// p^k with the convention 0^0 = 1.
inline double ipow(double p, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= p;
  return r;
}

inline double binomial_pmf(int n, int k, double p) {
  if (k < 0 || k > n) return 0.0;
  return binomial_coefficient(n, k) * ipow(p, k) * ipow(1.0 - p, n - k);
}

/// PMF of Binomial(n1, p1) + Binomial(n2, p2), indexed 0..n1+n2.
inline std::vector<double> binomial_sum_pmf(int n1, double p1, int n2, double p2) {
  std::vector<double> out(static_cast<std::size_t>(n1 + n2 + 1), 0.0);
  for (int k1 = 0; k1 <= n1; ++k1) {
    const double w1 = binomial_pmf(n1, k1, p1);
    if (w1 == 0.0) continue;
    for (int k2 = 0; k2 <= n2; ++k2) {
      out[static_cast<std::size_t>(k1 + k2)] += w1 * binomial_pmf(n2, k2, p2);
    }
  }
  return out;
}

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double dbm_to_mw(double dbm) { return db_to_linear(dbm); }

/// splitmix64 finalizer; used to derive independent seeds for sub-streams.
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  return mix_seed(mix_seed(a) ^ (b + 0x632be59bd9b4e019ULL));
}

/// splitmix64 as a UniformRandomBitGenerator. Seeding is free, which suits
/// the many short per-sample streams of the channel Monte-Carlo.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

}  // namespace mmrelay
