#pragma once

#include <cmath>
#include <numbers>
#include <random>

#include "roylab/random.hpp"

namespace roylab {

namespace detail {

inline double std_normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }
inline double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

// Draw from N(0,1) restricted to [a, inf) with a > 0 (Robert 1995, exponential proposal).
inline double tail_draw(double a, Rng& rng) {
  const double alpha = 0.5 * (a + std::sqrt(a * a + 4.0));
  std::exponential_distribution<double> expo(alpha);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (;;) {
    const double z = a + expo(rng);
    const double d = z - alpha;
    if (unif(rng) <= std::exp(-0.5 * d * d)) return z;
  }
}

}  // namespace detail

/// Draw from N(mu, sigma^2) truncated to (-inf, upper].
inline double truncated_normal_upper(double mu, double sigma, double upper, Rng& rng) {
  const double beta = (upper - mu) / sigma;
  if (beta >= 0.0) {
    // at least half the mass is kept, plain rejection is cheap
    std::normal_distribution<double> norm(0.0, 1.0);
    for (;;) {
      const double z = norm(rng);
      if (z <= beta) return mu + sigma * z;
    }
  }
  // mirror: z <= beta  <=>  -z >= -beta > 0
  const double z = -detail::tail_draw(-beta, rng);
  return std::fmin(mu + sigma * z, upper);
}

struct TruncatedMoments {
  double mean;
  double variance;
};

/// Mean and variance of N(mu, sigma^2) truncated to (-inf, upper].
inline TruncatedMoments truncated_normal_upper_moments(double mu, double sigma, double upper) {
  const double beta = (upper - mu) / sigma;
  const double lambda = detail::std_normal_pdf(beta) / detail::std_normal_cdf(beta);
  return {mu - sigma * lambda, sigma * sigma * (1.0 - beta * lambda - lambda * lambda)};
}

}  // namespace roylab
