#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "readapt/contrastive.hpp"
#include "readapt/losses.hpp"
#include "readapt/model.hpp"
#include "readapt/pool.hpp"

namespace readapt {

struct LossConfig {
  double lambda_dom = 7.0;
  double lambda_pred = 0.5;
  double lambda_c = 1.0;
  bool include_align = true;
  bool include_contrastive = true;
  bool include_s_reg = true;
};

// Immutable per-phase training inputs: raw model inputs for every
// sample that can appear in a batch, labels for the labeled pools and
// the current pseudo-label sets for the unlabeled target pool.
struct TrainingData {
  std::map<std::int64_t, std::vector<double>> inputs;
  std::map<std::int64_t, int> labels;
  std::map<std::int64_t, std::vector<int>> pls;
};

// One assembled optimization step. The id lists and subsets pin down
// everything random, so repeated evaluation at perturbed parameters
// (finite differences) sees exactly the same batch.
struct TrainingBatch {
  std::vector<std::int64_t> edl_ids;         // labeled or pseudo-labeled
  std::vector<std::int64_t> align_ids;       // unlabeled target samples
  std::vector<std::int64_t> contrastive_ids; // edl_ids inside labeled pools
  ContrastiveSubsets subsets;
};

LossBreakdown compute_loss(const EvidentialModel& m, const TrainingData& data,
                           const PoolState& pools, const TrainingBatch& batch,
                           const LossConfig& config);

// Analytic gradient of the batch loss with respect to every parameter
// and s. The contrastive term back-propagates through the latent
// features of every labeled pool member, since those features enter the
// distance-mass denominators.
struct BackwardResult {
  LossBreakdown loss;
  Gradients grads;
};
BackwardResult backward(const EvidentialModel& m, const TrainingData& data,
                        const PoolState& pools, const TrainingBatch& batch,
                        const LossConfig& config);

} // namespace readapt
