#include "readapt/checkpoint.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace readapt {

namespace {

constexpr char kMagic[8] = {'R', 'E', 'A', 'D', 'A', 'P', 'T', '1'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

template <typename T>
void write_pod(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in, const char* what) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) {
    throw std::runtime_error(std::string("checkpoint: truncated while "
                                         "reading ") + what);
  }
  return value;
}

} // namespace

void save_checkpoint(const std::string& path, const EvidentialModel& m,
                     std::uint64_t optimizer_step) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw std::runtime_error("checkpoint: cannot open " + path +
                             " for writing");
  }
  out.write(kMagic, sizeof(kMagic));
  write_pod(out, kVersion);
  write_pod(out, static_cast<std::uint32_t>(m.dims.d_in));
  write_pod(out, static_cast<std::uint32_t>(m.dims.hidden));
  write_pod(out, static_cast<std::uint32_t>(m.dims.d_feat));
  write_pod(out, static_cast<std::uint32_t>(m.dims.num_classes));
  write_pod(out, m.s);
  write_pod(out, optimizer_step);
  write_pod(out, static_cast<std::uint64_t>(m.params.size()));
  out.write(reinterpret_cast<const char*>(m.params.data()),
            static_cast<std::streamsize>(m.params.size() * sizeof(double)));
  if (!out) {
    throw std::runtime_error("checkpoint: write failed for " + path);
  }
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("checkpoint: cannot open " + path);
  }
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error("checkpoint: bad magic in " + path);
  }
  const auto version = read_pod<std::uint32_t>(in, "version");
  if (version != kVersion) {
    throw std::runtime_error("checkpoint: unsupported version " +
                             std::to_string(version));
  }
  Checkpoint ck;
  ck.model.dims.d_in = read_pod<std::uint32_t>(in, "d_in");
  ck.model.dims.hidden = read_pod<std::uint32_t>(in, "hidden");
  ck.model.dims.d_feat = read_pod<std::uint32_t>(in, "d_feat");
  ck.model.dims.num_classes = read_pod<std::uint32_t>(in, "num_classes");
  ck.model.s = read_pod<double>(in, "s");
  ck.optimizer_step = read_pod<std::uint64_t>(in, "optimizer step");
  const auto count = read_pod<std::uint64_t>(in, "parameter count");
  if (count != ck.model.dims.param_count()) {
    throw std::runtime_error("checkpoint: parameter count " +
                             std::to_string(count) +
                             " does not match the stored dimensions");
  }
  ck.model.params.resize(count);
  in.read(reinterpret_cast<char*>(ck.model.params.data()),
          static_cast<std::streamsize>(count * sizeof(double)));
  if (!in) {
    throw std::runtime_error("checkpoint: truncated parameter block in " +
                             path);
  }
  for (double v : ck.model.params) {
    if (!std::isfinite(v)) {
      throw std::runtime_error("checkpoint: non-finite parameter in " + path);
    }
  }
  return ck;
}

} // namespace readapt
