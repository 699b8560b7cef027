#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "readapt/dirichlet.hpp"

namespace readapt {

// Shapes of the classifier: input -> hidden -> feature (tanh after both
// dense layers), then a linear head feature -> classes whose outputs are
// exponentiated into Dirichlet concentrations.
struct ModelDims {
  std::size_t d_in = 0;
  std::size_t hidden = 0;
  std::size_t d_feat = 0;
  std::size_t num_classes = 0;

  std::size_t w1_count() const { return hidden * d_in; }
  std::size_t w2_count() const { return d_feat * hidden; }
  std::size_t w3_count() const { return num_classes * d_feat; }
  std::size_t extractor_count() const {
    return w1_count() + hidden + w2_count() + d_feat;
  }
  std::size_t head_count() const { return w3_count() + num_classes; }
  std::size_t param_count() const { return extractor_count() + head_count(); }

  // Offsets into the flat parameter vector.
  std::size_t off_w1() const { return 0; }
  std::size_t off_b1() const { return w1_count(); }
  std::size_t off_w2() const { return off_b1() + hidden; }
  std::size_t off_b2() const { return off_w2() + w2_count(); }
  std::size_t off_w3() const { return off_b2() + d_feat; }
  std::size_t off_b3() const { return off_w3() + w3_count(); }

  bool operator==(const ModelDims&) const = default;
};

// All parameters live in one flat vector (row-major weight matrices,
// then biases, layer by layer) so the optimizer and the finite
// difference checks can treat the model as a point in R^n. The entropic
// order s is learnable and kept inside (0.01, 0.99).
struct EvidentialModel {
  ModelDims dims;
  std::vector<double> params;
  double s = 0.5;
};

struct ForwardResult {
  std::vector<double> features; // after the second tanh
  std::vector<double> logits;   // clamped to [-30, 30]
  DirichletParams dirichlet;    // exp(logits)
};

// Intermediate activations kept for manual backpropagation.
struct ForwardCache {
  std::vector<double> x;
  std::vector<double> h1;       // tanh of first layer
  std::vector<double> features; // tanh of second layer
  std::vector<double> logits;   // clamped
  std::vector<bool> clamped;    // per-logit clamp mask
  std::vector<double> alpha;
  double alpha0 = 0.0;
};

// Seeded initializer: for each weight matrix, entries row-major from
// uniform(-L, L) with L = sqrt(6 / (fan_in + fan_out)); biases zero;
// s starts at 0.5. Distinct seeds give distinct models, same seed is
// bit-reproducible.
EvidentialModel init_model(ModelDims dims, std::uint64_t seed);
EvidentialModel init_model(std::size_t d_in, std::size_t d_feat,
                           std::size_t num_classes, std::uint64_t seed);

ForwardResult forward(const EvidentialModel& m, const std::vector<double>& x);
ForwardCache forward_cached(const EvidentialModel& m,
                            const std::vector<double>& x);

// Feature half only (layers 1-2); cheaper when the head is not needed.
std::vector<double> extract_features(const EvidentialModel& m,
                                     const std::vector<double>& x);

// Number of logits clipped at +/-30 since process start or last reset.
std::uint64_t logit_clamp_count();
void reset_logit_clamp_count();

// Gradient of a scalar loss with respect to every parameter and s,
// in the same flat layout as EvidentialModel::params.
struct Gradients {
  std::vector<double> params;
  double s = 0.0;
};

} // namespace readapt
