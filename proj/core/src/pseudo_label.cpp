#include "readapt/pseudo_label.hpp"

#include <stdexcept>
#include <string>

namespace readapt {

LabelContext make_label_context(FeatureMap features,
                                std::map<std::int64_t, int> labels,
                                PoolState pools, int num_classes,
                                std::size_t k) {
  if (num_classes < 2) {
    throw std::invalid_argument("make_label_context: need num_classes >= 2");
  }
  pools.validate();
  LabelContext ctx;
  ctx.features = std::move(features);
  ctx.labels = std::move(labels);
  ctx.pools = std::move(pools);
  ctx.num_classes = num_classes;
  ctx.k = k;

  std::vector<std::int64_t> all_ids;
  for (std::int64_t id : ctx.pools.source_labeled) all_ids.push_back(id);
  for (std::int64_t id : ctx.pools.target_labeled) all_ids.push_back(id);
  for (std::int64_t id : ctx.pools.target_unlabeled) all_ids.push_back(id);
  ctx.knn = knn_sets(all_ids, ctx.features, k);

  std::vector<std::int64_t> source_pool(ctx.pools.source_labeled.begin(),
                                        ctx.pools.source_labeled.end());
  std::vector<std::int64_t> target_pool(ctx.pools.target_labeled.begin(),
                                        ctx.pools.target_labeled.end());
  for (std::int64_t id : source_pool) {
    ctx.bound[id] = distance_upper_bound(id, source_pool, ctx.features);
  }
  for (std::int64_t id : target_pool) {
    ctx.bound[id] = distance_upper_bound(id, target_pool, ctx.features);
  }
  return ctx;
}

namespace {

int count_reliable(std::int64_t i, int c, const LabelContext& ctx,
                   const std::set<std::int64_t>& pool) {
  const std::vector<double>& fi = ctx.features.at(i);
  int count = 0;
  for (std::int64_t j : pool) {
    auto lbl = ctx.labels.find(j);
    if (lbl == ctx.labels.end() || lbl->second != c) continue;
    if (!mutual_knn(i, j, ctx.knn)) continue;
    double d = pairwise_distance(fi, ctx.features.at(j));
    if (d < ctx.bound.at(j)) ++count;
  }
  return count;
}

} // namespace

int similarity_score(std::int64_t i, int c, const LabelContext& ctx) {
  if (c < 0 || c >= ctx.num_classes) {
    throw std::invalid_argument("similarity_score: class " + std::to_string(c) +
                                " out of range");
  }
  return count_reliable(i, c, ctx, ctx.pools.source_labeled) +
         2 * count_reliable(i, c, ctx, ctx.pools.target_labeled);
}

std::vector<int> pseudo_label_set(std::int64_t i, const LabelContext& ctx) {
  std::vector<int> scores(ctx.num_classes);
  long total = 0;
  for (int c = 0; c < ctx.num_classes; ++c) {
    scores[c] = similarity_score(i, c, ctx);
    total += scores[c];
  }
  const double mean = static_cast<double>(total) /
                      static_cast<double>(ctx.num_classes);
  std::vector<int> pls;
  for (int c = 0; c < ctx.num_classes; ++c) {
    if (scores[c] > 0 && static_cast<double>(scores[c]) > mean) {
      pls.push_back(c);
    }
  }
  return pls;
}

std::map<std::int64_t, std::vector<int>> pseudo_label_all(
    const LabelContext& ctx) {
  std::map<std::int64_t, std::vector<int>> out;
  for (std::int64_t id : ctx.pools.target_unlabeled) {
    out[id] = pseudo_label_set(id, ctx);
  }
  return out;
}

} // namespace readapt
