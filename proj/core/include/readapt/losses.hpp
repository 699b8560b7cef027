#pragma once

#include <vector>

#include "readapt/dirichlet.hpp"
#include "readapt/entropy.hpp"

namespace readapt {

// Evidential negative log-likelihood: log alpha_0 - log alpha_y.
// Non-negative; zero only in the limit of infinite evidence for y.
double nll_loss(const DirichletParams& d, int y);

// KL of Dir(alpha_hat) against the flat Dirichlet, where alpha_hat
// keeps alpha except alpha_hat_y = 1. Penalizes evidence assigned to
// wrong classes. Non-negative.
double kl_loss(const DirichletParams& d, int y);

// One sample of the evidential batch loss: either a hard label or a
// (possibly empty) pseudo-label set.
struct EdlEntry {
  DirichletParams dirichlet;
  bool is_labeled = false;
  int label = -1;          // valid when is_labeled
  std::vector<int> pls;    // valid when !is_labeled; may be empty
};

// Mean of nll+kl over labeled entries, plus mean over entries with a
// nonempty pseudo-label set of the set-averaged nll+kl. Entries with an
// empty set contribute nothing; each mean is 0 when its group is empty.
double edl_loss(const std::vector<EdlEntry>& batch);

// Same, split into the nll and kl shares (they sum to edl_loss).
struct EdlParts {
  double nll = 0.0;
  double kl = 0.0;
  double total() const { return nll + kl; }
};
EdlParts edl_loss_parts(const std::vector<EdlEntry>& batch);

// Mean over the batch of lambda_dom * u_dom + lambda_pred * u_pred.
// Empty batch is defined as 0.
double alignment_loss(const std::vector<DirichletParams>& batch, RenyiOrder s,
                      double lambda_dom, double lambda_pred);

// (s - 1/2)^2, anchoring the learnable order near the center of (0,1).
double s_regularizer(RenyiOrder s);

struct LossBreakdown {
  double nll = 0.0;
  double kl = 0.0;
  double edl = 0.0;
  double align = 0.0;
  double contrastive = 0.0;
  double s_reg = 0.0;
  double total = 0.0;
};

} // namespace readapt
