#pragma once

#include <cstdint>

#include "readapt/dirichlet.hpp"
#include "readapt/entropy.hpp"

namespace readapt {

struct McEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
};

// Monte-Carlo estimate of the conditional entropy that u_pred computes
// in closed form: draws n simplex samples mu ~ Dir(alpha) and returns
// (1/(1-s)) * log mean_k sum_c mu_c^s together with a delta-method
// standard error. Deterministic for a fixed seed. Verification oracle
// only; nothing in the production path calls it.
McEstimate mc_conditional_entropy(const DirichletParams& d, RenyiOrder s,
                                  std::uint64_t n, std::uint64_t seed);

} // namespace readapt
