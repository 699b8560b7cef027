#include "readapt/mc.hpp"

#include <cmath>
#include <stdexcept>

#include "readapt/rng.hpp"

namespace readapt {

McEstimate mc_conditional_entropy(const DirichletParams& d, RenyiOrder s,
                                  std::uint64_t n, std::uint64_t seed) {
  if (n < 10000) {
    throw std::invalid_argument("mc_conditional_entropy: need n >= 1e4");
  }
  const double order = s.value();
  RandomStream rng(seed);
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::uint64_t k = 0; k < n; ++k) {
    std::vector<double> mu = rng.dirichlet(d.alpha());
    double y = 0.0;
    for (double m : mu) {
      if (m > 0.0) y += std::pow(m, order);
    }
    sum += y;
    sum_sq += y * y;
  }
  const double nd = static_cast<double>(n);
  const double mean = sum / nd;
  double var = (sum_sq - nd * mean * mean) / (nd - 1.0);
  if (var < 0.0) var = 0.0;

  McEstimate out;
  out.estimate = std::log(mean) / (1.0 - order);
  // Delta method through f(m) = log(m)/(1-s).
  out.std_error = std::sqrt(var / nd) / ((1.0 - order) * mean);
  return out;
}

} // namespace readapt
