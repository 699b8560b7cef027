#pragma once

#include <cstdint>
#include <map>
#include <vector>

namespace readapt {

using FeatureMap = std::map<std::int64_t, std::vector<double>>;

// Cosine distance 1 - <f_i/|f_i|, f_j/|f_j|>, in [0, 2].
// Zero-norm vectors have no direction and are rejected.
double pairwise_distance(const std::vector<double>& f_i,
                         const std::vector<double>& f_j);

// mu - 3*sigma of the distances from j to every pool member (population
// sigma, j itself included when it belongs to the pool). May be
// negative; callers use it as a strict threshold d < bound, so a
// negative bound simply rejects everything.
double distance_upper_bound(std::int64_t j,
                            const std::vector<std::int64_t>& pool,
                            const FeatureMap& features);

// k nearest neighbors by cosine distance for every id, self excluded,
// distance ties broken by ascending id. Returns id -> sorted-by-rank
// neighbor list of size min(k, n-1).
std::map<std::int64_t, std::vector<std::int64_t>> knn_sets(
    const std::vector<std::int64_t>& ids, const FeatureMap& features,
    std::size_t k);

// True when i is among j's neighbors and j among i's.
bool mutual_knn(std::int64_t i, std::int64_t j,
                const std::map<std::int64_t, std::vector<std::int64_t>>& knn);

} // namespace readapt
