#pragma once

#include <cstdint>
#include <vector>

#include "readapt/model.hpp"

namespace readapt {

// Momentum SGD over the flat parameter vector plus the learnable order.
// Two learning-rate groups: the extractor layers and s anneal from
// base_lr_extractor_and_s, the head from base_lr_head, both following
// lr(t) = base * 0.5 * (1 + cos(pi t / T)) over the planned step count.
struct OptimizerState {
  std::uint64_t step = 0;
  std::uint64_t total_steps = 1;
  double base_lr_extractor_and_s = 5e-4;
  double base_lr_head = 5e-3;
  double momentum = 0.9;
  double s_min = 0.01;
  double s_max = 0.99;
  std::vector<double> velocity;
  double velocity_s = 0.0;
};

OptimizerState make_optimizer(const EvidentialModel& m,
                              std::uint64_t total_steps,
                              double base_lr_extractor_and_s = 5e-4,
                              double base_lr_head = 5e-3);

// Cosine annealing factor applied to a base rate; step may equal
// total (factor 0).
double cosine_lr(double base_lr, std::uint64_t step, std::uint64_t total_steps);

// One update: velocity = momentum * velocity + gradient, parameter -=
// lr * velocity, then s is projected back into [s_min, s_max].
void sgd_step(EvidentialModel& m, const Gradients& grads, OptimizerState& opt);

} // namespace readapt
