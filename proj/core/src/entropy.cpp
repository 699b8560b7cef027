#include "readapt/entropy.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace readapt {

ProbVector::ProbVector(std::vector<double> p) : p_(std::move(p)) {
  if (p_.size() < 2) {
    throw std::invalid_argument("ProbVector: need at least 2 classes, got " +
                                std::to_string(p_.size()));
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < p_.size(); ++i) {
    if (!std::isfinite(p_[i]) || p_[i] < 0.0) {
      throw std::invalid_argument("ProbVector: entry " + std::to_string(i) +
                                  " is negative or non-finite");
    }
    sum += p_[i];
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw std::invalid_argument("ProbVector: entries sum to " +
                                std::to_string(sum) + ", expected 1");
  }
}

RenyiOrder::RenyiOrder(double s) : s_(s) {
  if (!std::isfinite(s) || s <= 0.0 || s >= 1.0) {
    throw std::invalid_argument("RenyiOrder: s must lie in (0, 1), got " +
                                std::to_string(s));
  }
}

double renyi_entropy(const ProbVector& p, RenyiOrder s) {
  const double order = s.value();
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) sum += std::pow(p[i], order);
  }
  return std::log(sum) / (1.0 - order);
}

double shannon_entropy(const ProbVector& p) {
  double h = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) h -= p[i] * std::log(p[i]);
  }
  return h;
}

} // namespace readapt
