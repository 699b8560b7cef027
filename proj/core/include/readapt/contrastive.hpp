#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "readapt/distance.hpp"
#include "readapt/pool.hpp"
#include "readapt/rng.hpp"

namespace readapt {

// Per-participant random same-class subsets: one drawn from the
// labeled source pool, one from the labeled target pool.
struct ContrastiveSubsets {
  std::map<std::int64_t, std::vector<std::int64_t>> from_source;
  std::map<std::int64_t, std::vector<std::int64_t>> from_target;
};

// Draws, for every batch id, uniform subsets of size min(m, class size)
// from its class in the source pool and in the labeled target pool.
// Consumes the stream in batch order, so identical streams reproduce
// identical subsets.
ContrastiveSubsets draw_contrastive_subsets(
    const std::vector<std::int64_t>& batch_ids,
    const std::map<std::int64_t, int>& labels, const PoolState& pools,
    std::size_t m, RandomStream& stream);

struct ContrastiveResult {
  double loss = 0.0;
  // Present only when gradients were requested; keyed by sample id,
  // gradient of the loss with respect to that sample's latent feature.
  std::map<std::int64_t, std::vector<double>> feature_grads;
};

// Class-alignment loss over the given batch ids (each must belong to
// the source or labeled target pool). Per sample: the ratio of the
// same-class subset distance mass to the distance mass against the
// whole source pool, the same ratio against the labeled target pool,
// and, for labeled target samples, the mean distance to the source
// subset. Ratio means are taken over the batch, the cross-domain term
// over the labeled-target members of the batch. Zero denominators and
// empty pools zero out the affected summand.
ContrastiveResult contrastive_loss(const std::vector<std::int64_t>& batch_ids,
                                   const FeatureMap& features,
                                   const std::map<std::int64_t, int>& labels,
                                   const PoolState& pools,
                                   const ContrastiveSubsets& subsets,
                                   bool want_grads);

// Convenience form drawing the subsets internally.
ContrastiveResult contrastive_loss(const std::vector<std::int64_t>& batch_ids,
                                   const FeatureMap& features,
                                   const std::map<std::int64_t, int>& labels,
                                   const PoolState& pools, std::size_t m,
                                   RandomStream& stream, bool want_grads);

} // namespace readapt
