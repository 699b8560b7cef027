#pragma once

#include <cstdint>
#include <string>

#include "readapt/model.hpp"

namespace readapt {

// Binary checkpoint layout (all integers and doubles little-endian):
//   bytes 0-7   magic "READAPT1"
//   u32         format version (1)
//   u32 x 4     d_in, hidden, d_feat, num_classes
//   f64         learnable order s
//   u64         optimizer step at save time
//   u64         parameter count n
//   f64 x n     flat parameter vector
// Round-trips bit-exactly: save(load(p)) reproduces the file.
void save_checkpoint(const std::string& path, const EvidentialModel& m,
                     std::uint64_t optimizer_step);

struct Checkpoint {
  EvidentialModel model;
  std::uint64_t optimizer_step = 0;
};

Checkpoint load_checkpoint(const std::string& path);

} // namespace readapt
