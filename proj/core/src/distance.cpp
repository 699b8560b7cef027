#include "readapt/distance.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace readapt {

double pairwise_distance(const std::vector<double>& f_i,
                         const std::vector<double>& f_j) {
  if (f_i.size() != f_j.size()) {
    throw std::invalid_argument("pairwise_distance: dimension mismatch");
  }
  double dot = 0.0, ni = 0.0, nj = 0.0;
  for (std::size_t k = 0; k < f_i.size(); ++k) {
    dot += f_i[k] * f_j[k];
    ni += f_i[k] * f_i[k];
    nj += f_j[k] * f_j[k];
  }
  if (ni <= 0.0 || nj <= 0.0) {
    throw std::invalid_argument(
        "pairwise_distance: zero-norm feature vector has no direction");
  }
  return 1.0 - dot / (std::sqrt(ni) * std::sqrt(nj));
}

namespace {

const std::vector<double>& feature_of(const FeatureMap& features,
                                      std::int64_t id, const char* fn) {
  auto it = features.find(id);
  if (it == features.end()) {
    throw std::invalid_argument(std::string(fn) + ": no features for id " +
                                std::to_string(id));
  }
  return it->second;
}

} // namespace

double distance_upper_bound(std::int64_t j,
                            const std::vector<std::int64_t>& pool,
                            const FeatureMap& features) {
  if (pool.empty()) {
    throw std::invalid_argument("distance_upper_bound: empty pool");
  }
  const std::vector<double>& fj = feature_of(features, j, "distance_upper_bound");
  double sum = 0.0, sum_sq = 0.0;
  for (std::int64_t p : pool) {
    double d = (p == j) ? 0.0
                        : pairwise_distance(fj, feature_of(features, p,
                                            "distance_upper_bound"));
    sum += d;
    sum_sq += d * d;
  }
  const double n = static_cast<double>(pool.size());
  const double mean = sum / n;
  double var = sum_sq / n - mean * mean;
  if (var < 0.0) var = 0.0;
  return mean - 3.0 * std::sqrt(var);
}

std::map<std::int64_t, std::vector<std::int64_t>> knn_sets(
    const std::vector<std::int64_t>& ids, const FeatureMap& features,
    std::size_t k) {
  if (k < 1) {
    throw std::invalid_argument("knn_sets: k must be >= 1");
  }
  std::map<std::int64_t, std::vector<std::int64_t>> out;
  std::vector<std::pair<double, std::int64_t>> cand;
  for (std::int64_t i : ids) {
    const std::vector<double>& fi = feature_of(features, i, "knn_sets");
    cand.clear();
    cand.reserve(ids.size());
    for (std::int64_t j : ids) {
      if (j == i) continue;
      cand.emplace_back(pairwise_distance(fi, feature_of(features, j,
                                          "knn_sets")), j);
    }
    const std::size_t take = std::min(k, cand.size());
    std::partial_sort(cand.begin(), cand.begin() + take, cand.end());
    std::vector<std::int64_t>& nbrs = out[i];
    nbrs.reserve(take);
    for (std::size_t t = 0; t < take; ++t) nbrs.push_back(cand[t].second);
  }
  return out;
}

bool mutual_knn(std::int64_t i, std::int64_t j,
                const std::map<std::int64_t, std::vector<std::int64_t>>& knn) {
  auto has = [&](std::int64_t a, std::int64_t b) {
    auto it = knn.find(a);
    if (it == knn.end()) return false;
    const auto& v = it->second;
    return std::find(v.begin(), v.end(), b) != v.end();
  };
  return has(i, j) && has(j, i);
}

} // namespace readapt
