#pragma once

#include <cstddef>
#include <vector>

namespace readapt {

// Probability vector over C >= 2 classes. Entries are validated to be
// non-negative and to sum to 1 within 1e-9.
class ProbVector {
 public:
  explicit ProbVector(std::vector<double> p);

  const std::vector<double>& values() const { return p_; }
  std::size_t size() const { return p_.size(); }
  double operator[](std::size_t i) const { return p_[i]; }

 private:
  std::vector<double> p_;
};

// Entropic order s, structurally confined to the open interval (0, 1).
class RenyiOrder {
 public:
  explicit RenyiOrder(double s);
  double value() const { return s_; }

 private:
  double s_;
};

// (1/(1-s)) * ln sum_c p_c^s, natural log. Zero entries contribute
// nothing to the sum.
double renyi_entropy(const ProbVector& p, RenyiOrder s);

// -sum_c p_c ln p_c with 0 ln 0 := 0.
double shannon_entropy(const ProbVector& p);

} // namespace readapt
