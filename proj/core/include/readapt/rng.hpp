#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace readapt {

// Derives a child seed from a root seed and a stream name, so that
// independent parts of a run (data generation, weight init, batch
// shuffling, ...) consume from unrelated streams. Stable across
// platforms: FNV-1a over the name, mixed with splitmix64.
std::uint64_t derive_seed(std::uint64_t root, std::string_view stream_name);

// Deterministic random stream. Wraps std::mt19937_64 but performs all
// value mapping (uniform doubles, bounded ints, normal and gamma
// variates) in-house, since the standard library distributions are
// implementation-defined and would break cross-platform reproducibility.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1), 53-bit resolution.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform on (0, 1]; safe to pass to log().
  double uniform_pos() { return 1.0 - uniform(); }

  // Uniform integer in [0, n). Rejection sampling, unbiased.
  std::uint64_t uniform_below(std::uint64_t n);

  // Standard normal via Box-Muller; second variate is cached.
  double normal();

  // Gamma(shape, 1) via Marsaglia-Tsang squeeze, with the
  // shape < 1 boost through Gamma(shape + 1).
  double gamma(double shape);

  // Dirichlet(alpha) as normalized gamma draws.
  std::vector<double> dirichlet(const std::vector<double>& alpha);

  // Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(uniform_below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_cached_normal_ = false;
  double cached_normal_ = 0.0;
};

} // namespace readapt
