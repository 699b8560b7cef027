#pragma once

#include <cstdint>
#include <vector>

#include "readapt/entropy.hpp"

namespace readapt {

// Concentration parameters of one Dirichlet distribution. Every
// component must be positive; the sum is cached on construction.
class DirichletParams {
 public:
  explicit DirichletParams(std::vector<double> alpha);

  const std::vector<double>& alpha() const { return alpha_; }
  double alpha0() const { return alpha0_; }
  std::size_t num_classes() const { return alpha_.size(); }

 private:
  std::vector<double> alpha_;
  double alpha0_;
};

struct UncertaintyScore {
  double u_dom = 0.0;
  double u_pred = 0.0;
  double u_total = 0.0;
};

// Expected class probabilities alpha_c / alpha_0.
ProbVector posterior_predictive(const DirichletParams& d);

// Conditional entropy of the class label given the Dirichlet belief:
// (1/(1-s)) * log sum_c Gamma(a0) Gamma(a_c+s) / (Gamma(a_c) Gamma(a0+s)),
// evaluated as log-gamma differences combined with log-sum-exp so it
// stays finite for large concentrations. Always >= 0.
double u_pred(const DirichletParams& d, RenyiOrder s);

// Mutual information between domain membership and the class label:
// entropy of the predictive mean minus u_pred. Non-negative up to
// rounding; values in [-1e-8, 0) are clamped to 0 and counted, values
// below -1e-8 throw (they indicate a bug, not rounding).
double u_dom(const DirichletParams& d, RenyiOrder s);

// Weighted combination of the two uncertainties.
UncertaintyScore u_total(const DirichletParams& d, RenyiOrder s,
                         double lambda_dom, double lambda_pred);

// Number of times u_dom has clamped a small negative to zero since
// process start or the last reset.
std::uint64_t u_dom_clamp_count();
void reset_u_dom_clamp_count();

// Shannon-limit counterparts, used by the Shannon-entropy selection
// baseline. u_pred_shannon is the exact s->1 limit
// psi(a0+1) - sum_c (a_c/a0) psi(a_c+1).
double u_pred_shannon(const DirichletParams& d);
double u_dom_shannon(const DirichletParams& d);

} // namespace readapt
