#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "readapt/distance.hpp"
#include "readapt/pool.hpp"

namespace readapt {

// Everything the similarity scoring needs, precomputed once per round:
// latent features of all pooled samples, labels of the labeled pools,
// the k-nearest-neighbor sets over all pooled ids, and the per-labeled-
// sample 3-sigma distance bound.
struct LabelContext {
  FeatureMap features;
  std::map<std::int64_t, int> labels; // source + labeled target only
  PoolState pools;
  int num_classes = 0;
  std::size_t k = 5;
  std::map<std::int64_t, std::vector<std::int64_t>> knn;
  std::map<std::int64_t, double> bound; // labeled id -> mu - 3 sigma
};

// Builds the context: KNN over source + target (labeled and unlabeled),
// bounds over the labeled sample's own pool (source pool for source
// samples, labeled-target pool for labeled target samples).
LabelContext make_label_context(FeatureMap features,
                                std::map<std::int64_t, int> labels,
                                PoolState pools, int num_classes,
                                std::size_t k);

// Number of reliable mutual neighbors of class c around sample i:
// labeled-target ones count twice, source ones once. A pair is reliable
// when it is mutually k-nearest and closer than the labeled sample's
// 3-sigma bound.
int similarity_score(std::int64_t i, int c, const LabelContext& ctx);

// Classes whose similarity score is positive and strictly above the
// mean score across classes. May be empty.
std::vector<int> pseudo_label_set(std::int64_t i, const LabelContext& ctx);

// PLS for every unlabeled target sample, keyed by id.
std::map<std::int64_t, std::vector<int>> pseudo_label_all(
    const LabelContext& ctx);

} // namespace readapt
