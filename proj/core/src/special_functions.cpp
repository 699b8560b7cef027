#include "readapt/special_functions.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace readapt {

namespace {

void check_positive(double x, const char* fn) {
  if (!std::isfinite(x)) {
    throw std::domain_error(std::string(fn) + ": argument must be finite, got " +
                            std::to_string(x));
  }
  if (x <= 0.0) {
    throw std::domain_error(std::string(fn) + ": argument must be positive, got " +
                            std::to_string(x));
  }
}

// Lanczos approximation, g = 7, 9 coefficients.
constexpr double kLanczos[9] = {
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
};

const double kHalfLogTwoPi = 0.91893853320467274178;

} // namespace

double log_gamma(double x) {
  check_positive(x, "log_gamma");
  if (x < 0.5) {
    // Reflection keeps the Lanczos argument away from the poles.
    // log Gamma(x) = log(pi / sin(pi x)) - log Gamma(1 - x)
    return std::log(M_PI / std::sin(M_PI * x)) - log_gamma(1.0 - x);
  }
  double z = x - 1.0;
  double sum = kLanczos[0];
  for (int i = 1; i < 9; ++i) {
    sum += kLanczos[i] / (z + i);
  }
  double t = z + 7.5;
  return kHalfLogTwoPi + (z + 0.5) * std::log(t) - t + std::log(sum);
}

double digamma(double x) {
  check_positive(x, "digamma");
  double result = 0.0;
  // Recurrence psi(x) = psi(x + 1) - 1/x until the asymptotic
  // series is accurate.
  while (x < 10.0) {
    result -= 1.0 / x;
    x += 1.0;
  }
  double inv = 1.0 / x;
  double inv2 = inv * inv;
  result += std::log(x) - 0.5 * inv;
  result -= inv2 * (1.0 / 12.0 - inv2 * (1.0 / 120.0 - inv2 * (1.0 / 252.0 -
            inv2 * (1.0 / 240.0 - inv2 * (1.0 / 132.0 -
            inv2 * (691.0 / 32760.0))))));
  return result;
}

double trigamma(double x) {
  check_positive(x, "trigamma");
  double result = 0.0;
  while (x < 10.0) {
    result += 1.0 / (x * x);
    x += 1.0;
  }
  double inv = 1.0 / x;
  double inv2 = inv * inv;
  result += inv * (1.0 + 0.5 * inv + inv2 * (1.0 / 6.0 - inv2 * (1.0 / 30.0 -
            inv2 * (1.0 / 42.0 - inv2 * (1.0 / 30.0 -
            inv2 * (5.0 / 66.0))))));
  return result;
}

double log_gamma_ratio(double x, double s) {
  check_positive(x, "log_gamma_ratio");
  if (!std::isfinite(s) || s < 0.0 || s > 1.0) {
    throw std::domain_error("log_gamma_ratio: shift must lie in [0, 1], got " +
                            std::to_string(s));
  }
  if (x < 1.0e4) {
    return log_gamma(x + s) - log_gamma(x);
  }
  // For large x the direct difference loses most of its digits.
  // Expand log Gamma(x + s) - log Gamma(x) around 1/x instead.
  return s * std::log(x) + (x + s - 0.5) * std::log1p(s / x) - s -
         s / (12.0 * x * (x + s));
}

} // namespace readapt
