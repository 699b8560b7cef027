#include "readapt/losses.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "readapt/special_functions.hpp"

namespace readapt {

namespace {

void check_label(const DirichletParams& d, int y, const char* fn) {
  if (y < 0 || static_cast<std::size_t>(y) >= d.num_classes()) {
    throw std::invalid_argument(std::string(fn) + ": label " +
                                std::to_string(y) + " out of range for " +
                                std::to_string(d.num_classes()) + " classes");
  }
}

} // namespace

double nll_loss(const DirichletParams& d, int y) {
  check_label(d, y, "nll_loss");
  return std::log(d.alpha0()) - std::log(d.alpha()[y]);
}

double kl_loss(const DirichletParams& d, int y) {
  check_label(d, y, "kl_loss");
  const std::size_t C = d.num_classes();
  // alpha_hat: the target class keeps no evidence beyond the prior.
  std::vector<double> ah(d.alpha());
  ah[y] = 1.0;
  double ah_sum = 0.0;
  for (double v : ah) ah_sum += v;

  double value = log_gamma(ah_sum) - log_gamma(static_cast<double>(C));
  double psi_sum = digamma(ah_sum);
  for (double v : ah) {
    value -= log_gamma(v);
    value += (v - 1.0) * (digamma(v) - psi_sum);
  }
  // Gibbs' inequality guarantees >= 0; shave rounding dust.
  return value < 0.0 ? 0.0 : value;
}

EdlParts edl_loss_parts(const std::vector<EdlEntry>& batch) {
  double labeled_nll = 0.0, labeled_kl = 0.0;
  double pseudo_nll = 0.0, pseudo_kl = 0.0;
  std::size_t n_labeled = 0, n_pseudo = 0;
  for (const EdlEntry& e : batch) {
    if (e.is_labeled) {
      labeled_nll += nll_loss(e.dirichlet, e.label);
      labeled_kl += kl_loss(e.dirichlet, e.label);
      ++n_labeled;
    } else if (!e.pls.empty()) {
      double nll_acc = 0.0, kl_acc = 0.0;
      for (int y : e.pls) {
        nll_acc += nll_loss(e.dirichlet, y);
        kl_acc += kl_loss(e.dirichlet, y);
      }
      const double inv = 1.0 / static_cast<double>(e.pls.size());
      pseudo_nll += nll_acc * inv;
      pseudo_kl += kl_acc * inv;
      ++n_pseudo;
    }
  }
  EdlParts parts;
  if (n_labeled > 0) {
    parts.nll += labeled_nll / static_cast<double>(n_labeled);
    parts.kl += labeled_kl / static_cast<double>(n_labeled);
  }
  if (n_pseudo > 0) {
    parts.nll += pseudo_nll / static_cast<double>(n_pseudo);
    parts.kl += pseudo_kl / static_cast<double>(n_pseudo);
  }
  return parts;
}

double edl_loss(const std::vector<EdlEntry>& batch) {
  return edl_loss_parts(batch).total();
}

double alignment_loss(const std::vector<DirichletParams>& batch, RenyiOrder s,
                      double lambda_dom, double lambda_pred) {
  if (batch.empty()) return 0.0;
  double acc = 0.0;
  for (const DirichletParams& d : batch) {
    acc += lambda_dom * u_dom(d, s) + lambda_pred * u_pred(d, s);
  }
  return acc / static_cast<double>(batch.size());
}

double s_regularizer(RenyiOrder s) {
  const double delta = s.value() - 0.5;
  return delta * delta;
}

} // namespace readapt
