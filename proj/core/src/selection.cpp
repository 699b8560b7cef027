#include "readapt/selection.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace readapt {

namespace {

template <typename ScoreFn>
std::vector<ScoredSample> score_pool(
    const std::map<std::int64_t, std::vector<double>>& inputs,
    const PoolState& pools, ScoreFn&& score_fn) {
  std::vector<ScoredSample> out;
  out.reserve(pools.target_unlabeled.size());
  for (std::int64_t id : pools.target_unlabeled) {
    auto it = inputs.find(id);
    if (it == inputs.end()) {
      throw std::invalid_argument("score_unlabeled: no input for id " +
                                  std::to_string(id));
    }
    out.push_back(ScoredSample{id, score_fn(it->second)});
  }
  return out;
}

} // namespace

std::vector<ScoredSample> score_unlabeled(
    const EvidentialModel& m,
    const std::map<std::int64_t, std::vector<double>>& inputs,
    const PoolState& pools, double lambda_dom, double lambda_pred) {
  RenyiOrder s(m.s);
  return score_pool(inputs, pools, [&](const std::vector<double>& x) {
    return u_total(forward(m, x).dirichlet, s, lambda_dom, lambda_pred);
  });
}

std::vector<ScoredSample> score_unlabeled_shannon(
    const EvidentialModel& m,
    const std::map<std::int64_t, std::vector<double>>& inputs,
    const PoolState& pools, double lambda_dom, double lambda_pred) {
  return score_pool(inputs, pools, [&](const std::vector<double>& x) {
    DirichletParams d = forward(m, x).dirichlet;
    UncertaintyScore u;
    u.u_dom = u_dom_shannon(d);
    u.u_pred = u_pred_shannon(d);
    u.u_total = lambda_dom * u.u_dom + lambda_pred * u.u_pred;
    return u;
  });
}

std::vector<std::int64_t> select_candidates(
    const std::vector<ScoredSample>& scores, const SelectionRound& round) {
  if (scores.empty()) {
    throw std::invalid_argument("select_candidates: empty score list");
  }
  if (round.budget < 1) {
    throw std::invalid_argument("select_candidates: budget must be >= 1");
  }
  std::vector<const ScoredSample*> order;
  order.reserve(scores.size());
  for (const ScoredSample& s : scores) order.push_back(&s);
  std::sort(order.begin(), order.end(),
            [](const ScoredSample* a, const ScoredSample* b) {
              if (a->score.u_total != b->score.u_total) {
                return a->score.u_total > b->score.u_total;
              }
              return a->id < b->id;
            });
  const std::size_t take =
      std::min(round.candidate_multiplier() * round.budget, order.size());
  std::vector<std::int64_t> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) out.push_back(order[i]->id);
  return out;
}

std::vector<std::int64_t> diversity_filter(
    const std::vector<std::int64_t>& candidates, const FeatureMap& features,
    const std::vector<ScoredSample>& scores, std::size_t budget) {
  if (budget > candidates.size()) {
    throw std::invalid_argument(
        "diversity_filter: budget exceeds candidate count");
  }
  if (budget == candidates.size()) return candidates;

  std::map<std::int64_t, double> u_of;
  for (const ScoredSample& s : scores) u_of[s.id] = s.score.u_total;

  const std::size_t n = candidates.size();
  std::vector<double> mean_dist(n, 0.0), u_raw(n, 0.0);
  for (std::size_t a = 0; a < n; ++a) {
    auto it = u_of.find(candidates[a]);
    if (it == u_of.end()) {
      throw std::invalid_argument("diversity_filter: candidate " +
                                  std::to_string(candidates[a]) +
                                  " has no score");
    }
    u_raw[a] = it->second;
    double acc = 0.0;
    for (std::size_t b = 0; b < n; ++b) {
      if (a == b) continue;
      acc += pairwise_distance(features.at(candidates[a]),
                               features.at(candidates[b]));
    }
    mean_dist[a] = n > 1 ? acc / static_cast<double>(n - 1) : 0.0;
  }

  auto normalize = [](std::vector<double>& v) {
    double lo = v[0], hi = v[0];
    for (double x : v) {
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
    const double span = hi - lo;
    for (double& x : v) {
      x = span > 0.0 ? (x - lo) / span : 0.5;
    }
  };
  normalize(mean_dist);
  normalize(u_raw);

  std::vector<std::size_t> order(n);
  for (std::size_t a = 0; a < n; ++a) order[a] = a;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double ga = mean_dist[a] * (1.0 + u_raw[a]);
    const double gb = mean_dist[b] * (1.0 + u_raw[b]);
    if (ga != gb) return ga > gb;
    return candidates[a] < candidates[b];
  });
  std::vector<std::int64_t> out;
  out.reserve(budget);
  for (std::size_t t = 0; t < budget; ++t) out.push_back(candidates[order[t]]);
  return out;
}

} // namespace readapt
