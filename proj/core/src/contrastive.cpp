#include "readapt/contrastive.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace readapt {

namespace {

std::vector<std::int64_t> class_members(const std::set<std::int64_t>& pool,
                                        const std::map<std::int64_t, int>& labels,
                                        int cls) {
  std::vector<std::int64_t> out;
  for (std::int64_t id : pool) {
    auto it = labels.find(id);
    if (it != labels.end() && it->second == cls) out.push_back(id);
  }
  return out;
}

std::vector<std::int64_t> sample_subset(std::vector<std::int64_t> ids,
                                        std::size_t m, RandomStream& stream) {
  const std::size_t take = std::min(m, ids.size());
  for (std::size_t t = 0; t < take; ++t) {
    std::size_t j = t + static_cast<std::size_t>(
                            stream.uniform_below(ids.size() - t));
    std::swap(ids[t], ids[j]);
  }
  ids.resize(take);
  return ids;
}

struct UnitFeature {
  std::vector<double> unit;
  double norm = 0.0;
};

// Gradient of d(i,j) = 1 - <u_i, u_j> with respect to the raw feature
// behind u_a: -(u_other - <u_i,u_j> u_a) / norm_a.
void add_pair_gradient(const UnitFeature& a, const UnitFeature& other,
                       double cos_ij, double weight, std::vector<double>& g_a) {
  const double inv_norm = weight / a.norm;
  for (std::size_t k = 0; k < g_a.size(); ++k) {
    g_a[k] -= inv_norm * (other.unit[k] - cos_ij * a.unit[k]);
  }
}

} // namespace

ContrastiveSubsets draw_contrastive_subsets(
    const std::vector<std::int64_t>& batch_ids,
    const std::map<std::int64_t, int>& labels, const PoolState& pools,
    std::size_t m, RandomStream& stream) {
  ContrastiveSubsets subsets;
  for (std::int64_t id : batch_ids) {
    auto it = labels.find(id);
    if (it == labels.end()) {
      throw std::invalid_argument("draw_contrastive_subsets: id " +
                                  std::to_string(id) + " has no label");
    }
    subsets.from_source[id] = sample_subset(
        class_members(pools.source_labeled, labels, it->second), m, stream);
    subsets.from_target[id] = sample_subset(
        class_members(pools.target_labeled, labels, it->second), m, stream);
  }
  return subsets;
}

ContrastiveResult contrastive_loss(const std::vector<std::int64_t>& batch_ids,
                                   const FeatureMap& features,
                                   const std::map<std::int64_t, int>& labels,
                                   const PoolState& pools,
                                   const ContrastiveSubsets& subsets,
                                   bool want_grads) {
  ContrastiveResult result;
  if (batch_ids.empty()) return result;

  // Unit vectors for everything a pair can touch.
  std::map<std::int64_t, UnitFeature> units;
  auto unit_of = [&](std::int64_t id) -> const UnitFeature& {
    auto it = units.find(id);
    if (it != units.end()) return it->second;
    auto fit = features.find(id);
    if (fit == features.end()) {
      throw std::invalid_argument("contrastive_loss: no features for id " +
                                  std::to_string(id));
    }
    double n2 = 0.0;
    for (double v : fit->second) n2 += v * v;
    if (n2 <= 0.0) {
      throw std::invalid_argument(
          "contrastive_loss: zero-norm feature for id " + std::to_string(id));
    }
    UnitFeature uf;
    uf.norm = std::sqrt(n2);
    uf.unit.resize(fit->second.size());
    for (std::size_t k = 0; k < uf.unit.size(); ++k) {
      uf.unit[k] = fit->second[k] / uf.norm;
    }
    return units.emplace(id, std::move(uf)).first->second;
  };

  std::size_t d_feat = 0;
  auto grad_of = [&](std::int64_t id) -> std::vector<double>& {
    auto [it, fresh] = result.feature_grads.try_emplace(id);
    if (fresh) it->second.assign(d_feat, 0.0);
    return it->second;
  };

  // weight * d(i,j) added to the loss; gradients fan out to both ends.
  auto add_weighted_pair = [&](std::int64_t i, std::int64_t j, double weight) {
    if (i == j || weight == 0.0) return;
    const UnitFeature& ui = unit_of(i);
    const UnitFeature& uj = unit_of(j);
    double cos_ij = 0.0;
    for (std::size_t k = 0; k < ui.unit.size(); ++k) {
      cos_ij += ui.unit[k] * uj.unit[k];
    }
    if (want_grads) {
      d_feat = ui.unit.size();
      add_pair_gradient(ui, uj, cos_ij, weight, grad_of(i));
      add_pair_gradient(uj, ui, cos_ij, weight, grad_of(j));
    }
  };

  auto distance_sum = [&](std::int64_t i,
                          const std::vector<std::int64_t>& ids) {
    const UnitFeature& ui = unit_of(i);
    double acc = 0.0;
    for (std::int64_t j : ids) {
      if (j == i) continue;
      const UnitFeature& uj = unit_of(j);
      double cos_ij = 0.0;
      for (std::size_t k = 0; k < ui.unit.size(); ++k) {
        cos_ij += ui.unit[k] * uj.unit[k];
      }
      acc += 1.0 - cos_ij;
    }
    return acc;
  };

  const std::vector<std::int64_t> source_pool(pools.source_labeled.begin(),
                                              pools.source_labeled.end());
  const std::vector<std::int64_t> target_pool(pools.target_labeled.begin(),
                                              pools.target_labeled.end());

  std::size_t n_target_members = 0;
  for (std::int64_t i : batch_ids) {
    if (pools.target_labeled.count(i)) ++n_target_members;
  }
  const double ratio_norm = 1.0 / static_cast<double>(batch_ids.size());
  const double cross_norm =
      n_target_members > 0 ? 1.0 / static_cast<double>(n_target_members) : 0.0;

  double loss = 0.0;
  for (std::int64_t i : batch_ids) {
    if (!pools.source_labeled.count(i) && !pools.target_labeled.count(i)) {
      throw std::invalid_argument("contrastive_loss: id " + std::to_string(i) +
                                  " is not in a labeled pool");
    }
    const std::vector<std::int64_t>& sub_s = subsets.from_source.at(i);
    const std::vector<std::int64_t>& sub_t = subsets.from_target.at(i);

    // Same-class mass against each labeled pool's total mass.
    for (int which = 0; which < 2; ++which) {
      const std::vector<std::int64_t>& sub = which == 0 ? sub_s : sub_t;
      const std::vector<std::int64_t>& pool = which == 0 ? source_pool
                                                         : target_pool;
      if (pool.empty()) continue;
      const double den = distance_sum(i, pool);
      if (den == 0.0) continue;
      const double num = distance_sum(i, sub);
      const double ratio = num / den;
      loss += ratio_norm * ratio;
      if (want_grads) {
        // d(ratio)/d d(i,j) = (in-subset - ratio) / den for pool js.
        for (std::int64_t j : sub) {
          add_weighted_pair(i, j, ratio_norm / den);
        }
        for (std::int64_t j : pool) {
          add_weighted_pair(i, j, -ratio_norm * ratio / den);
        }
      }
    }

    // Cross-domain pull: labeled target samples toward their source
    // class subset.
    if (pools.target_labeled.count(i) && !sub_s.empty()) {
      const double inv = 1.0 / static_cast<double>(sub_s.size());
      loss += cross_norm * inv * distance_sum(i, sub_s);
      if (want_grads) {
        for (std::int64_t j : sub_s) {
          add_weighted_pair(i, j, cross_norm * inv);
        }
      }
    }
  }

  result.loss = loss;
  return result;
}

ContrastiveResult contrastive_loss(const std::vector<std::int64_t>& batch_ids,
                                   const FeatureMap& features,
                                   const std::map<std::int64_t, int>& labels,
                                   const PoolState& pools, std::size_t m,
                                   RandomStream& stream, bool want_grads) {
  ContrastiveSubsets subsets =
      draw_contrastive_subsets(batch_ids, labels, pools, m, stream);
  return contrastive_loss(batch_ids, features, labels, pools, subsets,
                          want_grads);
}

} // namespace readapt
