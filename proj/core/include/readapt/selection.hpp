#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "readapt/dirichlet.hpp"
#include "readapt/distance.hpp"
#include "readapt/model.hpp"
#include "readapt/pool.hpp"

namespace readapt {

struct ScoredSample {
  std::int64_t id = 0;
  UncertaintyScore score;
};

// One uncertainty score per unlabeled target sample under the model's
// current entropic order, ascending by id.
std::vector<ScoredSample> score_unlabeled(
    const EvidentialModel& m,
    const std::map<std::int64_t, std::vector<double>>& inputs,
    const PoolState& pools, double lambda_dom, double lambda_pred);

// Shannon-entropy counterpart used by the ablation strategy; the
// closed-form limit of the order-s scores as s approaches 1.
std::vector<ScoredSample> score_unlabeled_shannon(
    const EvidentialModel& m,
    const std::map<std::int64_t, std::vector<double>>& inputs,
    const PoolState& pools, double lambda_dom, double lambda_pred);

struct SelectionRound {
  int round_index = 1;        // 1-based
  std::size_t budget = 0;     // per-round labeling budget
  std::size_t candidate_multiplier() const {
    return static_cast<std::size_t>(round_index) + 1;
  }
};

// Step one of selection: the top (i+1)*budget ids by total uncertainty,
// descending, ties by ascending id, clamped to the pool size.
std::vector<std::int64_t> select_candidates(
    const std::vector<ScoredSample>& scores, const SelectionRound& round);

// Step two: keep the budget ids maximizing d*(1+u), where d is each
// candidate's mean distance to the other candidates and u its total
// uncertainty, both min-max normalized over the candidate set
// (degenerate spans normalize to 0.5). Ties by ascending id.
std::vector<std::int64_t> diversity_filter(
    const std::vector<std::int64_t>& candidates, const FeatureMap& features,
    const std::vector<ScoredSample>& scores, std::size_t budget);

} // namespace readapt
