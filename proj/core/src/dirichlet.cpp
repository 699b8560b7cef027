#include "readapt/dirichlet.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "readapt/special_functions.hpp"

namespace readapt {

namespace {

std::atomic<std::uint64_t> g_clamp_count{0};

} // namespace

DirichletParams::DirichletParams(std::vector<double> alpha)
    : alpha_(std::move(alpha)) {
  if (alpha_.size() < 2) {
    throw std::invalid_argument("DirichletParams: need at least 2 classes, got " +
                                std::to_string(alpha_.size()));
  }
  alpha0_ = 0.0;
  for (std::size_t i = 0; i < alpha_.size(); ++i) {
    if (!std::isfinite(alpha_[i]) || alpha_[i] <= 0.0) {
      throw std::invalid_argument("DirichletParams: component " +
                                  std::to_string(i) +
                                  " must be positive and finite");
    }
    alpha0_ += alpha_[i];
  }
  if (!std::isfinite(alpha0_)) {
    throw std::invalid_argument("DirichletParams: concentration sum overflows");
  }
}

ProbVector posterior_predictive(const DirichletParams& d) {
  std::vector<double> p(d.num_classes());
  for (std::size_t c = 0; c < p.size(); ++c) {
    p[c] = d.alpha()[c] / d.alpha0();
  }
  return ProbVector(std::move(p));
}

double u_pred(const DirichletParams& d, RenyiOrder s) {
  const double order = s.value();
  const double a0 = d.alpha0();
  // Per-class log weights t_c = lg(a_c+s)-lg(a_c) - [lg(a0+s)-lg(a0)].
  const double denom = log_gamma_ratio(a0, order);
  std::vector<double> t(d.num_classes());
  double t_max = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < t.size(); ++c) {
    t[c] = log_gamma_ratio(d.alpha()[c], order) - denom;
    t_max = std::max(t_max, t[c]);
  }
  double acc = 0.0;
  for (double tc : t) acc += std::exp(tc - t_max);
  double result = (t_max + std::log(acc)) / (1.0 - order);
  if (result < 0.0) {
    if (result < -1e-9) {
      throw std::logic_error("u_pred: value " + std::to_string(result) +
                             " below zero beyond rounding tolerance");
    }
    result = 0.0;
  }
  return result;
}

double u_dom(const DirichletParams& d, RenyiOrder s) {
  double value = renyi_entropy(posterior_predictive(d), s) - u_pred(d, s);
  if (value < 0.0) {
    if (value < -1e-8) {
      throw std::logic_error("u_dom: value " + std::to_string(value) +
                             " below -1e-8, indicates a defect upstream");
    }
    g_clamp_count.fetch_add(1, std::memory_order_relaxed);
    value = 0.0;
  }
  return value;
}

UncertaintyScore u_total(const DirichletParams& d, RenyiOrder s,
                         double lambda_dom, double lambda_pred) {
  if (!(lambda_dom >= 0.0) || !(lambda_pred >= 0.0)) {
    throw std::invalid_argument("u_total: weights must be non-negative");
  }
  UncertaintyScore u;
  u.u_dom = u_dom(d, s);
  u.u_pred = u_pred(d, s);
  u.u_total = lambda_dom * u.u_dom + lambda_pred * u.u_pred;
  return u;
}

std::uint64_t u_dom_clamp_count() {
  return g_clamp_count.load(std::memory_order_relaxed);
}

void reset_u_dom_clamp_count() {
  g_clamp_count.store(0, std::memory_order_relaxed);
}

double u_pred_shannon(const DirichletParams& d) {
  const double a0 = d.alpha0();
  double acc = digamma(a0 + 1.0);
  for (double ac : d.alpha()) {
    acc -= (ac / a0) * digamma(ac + 1.0);
  }
  return std::max(acc, 0.0);
}

double u_dom_shannon(const DirichletParams& d) {
  double value = shannon_entropy(posterior_predictive(d)) - u_pred_shannon(d);
  return std::max(value, 0.0);
}

} // namespace readapt
