#pragma once

// Small helpers shared by the test suites: running-moment accumulator for
// Monte-Carlo oracles and deterministic seed mixing.

#include <cmath>
#include <cstdint>
#include <random>

namespace testutil {

struct Welford {
  std::uint64_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++n;
    const double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
  }
  double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
  double sd() const { return std::sqrt(variance()); }
  double se() const { return n > 0 ? sd() / std::sqrt(static_cast<double>(n)) : 0.0; }
};

inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline std::mt19937_64 seeded(std::uint64_t a, std::uint64_t b = 0) {
  return std::mt19937_64(mix64(a + 0x632BE59BD9B4E019ULL * b));
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * std::generate_canonical<double, 53>(rng);
}

inline double log_uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::exp(uniform(rng, std::log(lo), std::log(hi)));
}

}  // namespace testutil
