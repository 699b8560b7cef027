#include "readapt/rng.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace readapt {

namespace {

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

} // namespace

std::uint64_t derive_seed(std::uint64_t root, std::string_view stream_name) {
  return splitmix64(root ^ fnv1a64(stream_name));
}

std::uint64_t RandomStream::uniform_below(std::uint64_t n) {
  if (n == 0) {
    throw std::invalid_argument("uniform_below: bound must be positive");
  }
  const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t r = (max % n + 1) % n; // 2^64 mod n
  std::uint64_t x;
  do {
    x = engine_();
  } while (x > max - r);
  return x % n;
}

double RandomStream::normal() {
  if (has_cached_normal_) {
    has_cached_normal_ = false;
    return cached_normal_;
  }
  double u1 = uniform_pos();
  double u2 = uniform();
  double radius = std::sqrt(-2.0 * std::log(u1));
  double angle = 2.0 * M_PI * u2;
  cached_normal_ = radius * std::sin(angle);
  has_cached_normal_ = true;
  return radius * std::cos(angle);
}

double RandomStream::gamma(double shape) {
  if (!(shape > 0.0) || !std::isfinite(shape)) {
    throw std::invalid_argument("gamma: shape must be positive and finite, got " +
                                std::to_string(shape));
  }
  if (shape < 1.0) {
    double g = gamma(shape + 1.0);
    double u = uniform_pos();
    return g * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = normal();
    double t = 1.0 + c * x;
    if (t <= 0.0) continue;
    double v = t * t * t;
    double u = uniform_pos();
    double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

std::vector<double> RandomStream::dirichlet(const std::vector<double>& alpha) {
  if (alpha.empty()) {
    throw std::invalid_argument("dirichlet: concentration vector is empty");
  }
  std::vector<double> out(alpha.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    out[i] = gamma(alpha[i]);
    sum += out[i];
  }
  if (sum <= 0.0) {
    // Vanishingly unlikely unless every shape underflowed; retry once
    // with the smallest representable positive mass on each slot.
    for (auto& v : out) v = std::numeric_limits<double>::min();
    sum = static_cast<double>(out.size()) * std::numeric_limits<double>::min();
  }
  for (auto& v : out) v /= sum;
  return out;
}

} // namespace readapt
