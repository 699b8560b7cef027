#include "readapt/model.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>
#include <string>

#include "readapt/rng.hpp"

namespace readapt {

namespace {

std::atomic<std::uint64_t> g_logit_clamp_count{0};

constexpr double kLogitClamp = 30.0;

void check_dims(const ModelDims& d) {
  if (d.d_in < 1 || d.hidden < 1 || d.d_feat < 1 || d.num_classes < 2) {
    throw std::invalid_argument(
        "ModelDims: need d_in, hidden, d_feat >= 1 and num_classes >= 2");
  }
}

void affine(const double* w, const double* b, const std::vector<double>& in,
            std::vector<double>& out, std::size_t rows, std::size_t cols) {
  out.resize(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    double acc = b[r];
    const double* wr = w + r * cols;
    for (std::size_t c = 0; c < cols; ++c) acc += wr[c] * in[c];
    out[r] = acc;
  }
}

void tanh_inplace(std::vector<double>& v) {
  for (auto& x : v) x = std::tanh(x);
}

} // namespace

EvidentialModel init_model(ModelDims dims, std::uint64_t seed) {
  check_dims(dims);
  EvidentialModel m;
  m.dims = dims;
  m.params.assign(dims.param_count(), 0.0);
  m.s = 0.5;
  RandomStream rng(seed);
  auto fill = [&](std::size_t off, std::size_t count, std::size_t fan_in,
                  std::size_t fan_out) {
    double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (std::size_t i = 0; i < count; ++i) {
      m.params[off + i] = (2.0 * rng.uniform() - 1.0) * limit;
    }
  };
  fill(dims.off_w1(), dims.w1_count(), dims.d_in, dims.hidden);
  fill(dims.off_w2(), dims.w2_count(), dims.hidden, dims.d_feat);
  fill(dims.off_w3(), dims.w3_count(), dims.d_feat, dims.num_classes);
  return m;
}

EvidentialModel init_model(std::size_t d_in, std::size_t d_feat,
                           std::size_t num_classes, std::uint64_t seed) {
  ModelDims dims;
  dims.d_in = d_in;
  dims.hidden = 32;
  dims.d_feat = d_feat;
  dims.num_classes = num_classes;
  return init_model(dims, seed);
}

ForwardCache forward_cached(const EvidentialModel& m,
                            const std::vector<double>& x) {
  const ModelDims& d = m.dims;
  if (x.size() != d.d_in) {
    throw std::invalid_argument("forward: input has dimension " +
                                std::to_string(x.size()) + ", model expects " +
                                std::to_string(d.d_in));
  }
  for (double v : x) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("forward: non-finite input component");
    }
  }
  const double* p = m.params.data();
  ForwardCache cache;
  cache.x = x;
  affine(p + d.off_w1(), p + d.off_b1(), x, cache.h1, d.hidden, d.d_in);
  tanh_inplace(cache.h1);
  affine(p + d.off_w2(), p + d.off_b2(), cache.h1, cache.features, d.d_feat,
         d.hidden);
  tanh_inplace(cache.features);
  affine(p + d.off_w3(), p + d.off_b3(), cache.features, cache.logits,
         d.num_classes, d.d_feat);

  cache.clamped.assign(d.num_classes, false);
  cache.alpha.resize(d.num_classes);
  cache.alpha0 = 0.0;
  for (std::size_t c = 0; c < d.num_classes; ++c) {
    double z = cache.logits[c];
    if (!std::isfinite(z)) {
      throw std::runtime_error("forward: non-finite logit, parameters corrupt");
    }
    if (z > kLogitClamp || z < -kLogitClamp) {
      z = z > kLogitClamp ? kLogitClamp : -kLogitClamp;
      cache.clamped[c] = true;
      g_logit_clamp_count.fetch_add(1, std::memory_order_relaxed);
    }
    cache.logits[c] = z;
    cache.alpha[c] = std::exp(z);
    cache.alpha0 += cache.alpha[c];
  }
  return cache;
}

ForwardResult forward(const EvidentialModel& m, const std::vector<double>& x) {
  ForwardCache cache = forward_cached(m, x);
  return ForwardResult{std::move(cache.features), std::move(cache.logits),
                       DirichletParams(std::move(cache.alpha))};
}

std::vector<double> extract_features(const EvidentialModel& m,
                                     const std::vector<double>& x) {
  const ModelDims& d = m.dims;
  if (x.size() != d.d_in) {
    throw std::invalid_argument("extract_features: input dimension mismatch");
  }
  const double* p = m.params.data();
  std::vector<double> h1, f;
  affine(p + d.off_w1(), p + d.off_b1(), x, h1, d.hidden, d.d_in);
  tanh_inplace(h1);
  affine(p + d.off_w2(), p + d.off_b2(), h1, f, d.d_feat, d.hidden);
  tanh_inplace(f);
  return f;
}

std::uint64_t logit_clamp_count() {
  return g_logit_clamp_count.load(std::memory_order_relaxed);
}

void reset_logit_clamp_count() {
  g_logit_clamp_count.store(0, std::memory_order_relaxed);
}

} // namespace readapt
