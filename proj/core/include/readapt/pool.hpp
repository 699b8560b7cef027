#pragma once

#include <cstdint>
#include <set>
#include <stdexcept>

namespace readapt {

// The evolving partition of sample ids: labeled source, labeled target
// (grows by the per-round budget), unlabeled target (shrinks).
struct PoolState {
  std::set<std::int64_t> source_labeled;
  std::set<std::int64_t> target_labeled;
  std::set<std::int64_t> target_unlabeled;

  void validate() const {
    for (std::int64_t id : target_labeled) {
      if (source_labeled.count(id) || target_unlabeled.count(id)) {
        throw std::logic_error("PoolState: pools overlap at id " +
                               std::to_string(id));
      }
    }
    for (std::int64_t id : target_unlabeled) {
      if (source_labeled.count(id)) {
        throw std::logic_error("PoolState: pools overlap at id " +
                               std::to_string(id));
      }
    }
  }

  // Move an unlabeled target sample into the labeled target pool.
  void mark_labeled(std::int64_t id) {
    if (!target_unlabeled.erase(id)) {
      throw std::logic_error("PoolState: id " + std::to_string(id) +
                             " is not in the unlabeled target pool");
    }
    target_labeled.insert(id);
  }
};

} // namespace readapt
