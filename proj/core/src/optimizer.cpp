#include "readapt/optimizer.hpp"

#include <cmath>
#include <stdexcept>

namespace readapt {

OptimizerState make_optimizer(const EvidentialModel& m,
                              std::uint64_t total_steps,
                              double base_lr_extractor_and_s,
                              double base_lr_head) {
  if (total_steps < 1) {
    throw std::invalid_argument("make_optimizer: need total_steps >= 1");
  }
  OptimizerState opt;
  opt.total_steps = total_steps;
  opt.base_lr_extractor_and_s = base_lr_extractor_and_s;
  opt.base_lr_head = base_lr_head;
  opt.velocity.assign(m.params.size(), 0.0);
  return opt;
}

double cosine_lr(double base_lr, std::uint64_t step,
                 std::uint64_t total_steps) {
  if (total_steps == 0) return 0.0;
  if (step > total_steps) step = total_steps;
  const double frac =
      static_cast<double>(step) / static_cast<double>(total_steps);
  return base_lr * 0.5 * (1.0 + std::cos(M_PI * frac));
}

void sgd_step(EvidentialModel& m, const Gradients& grads, OptimizerState& opt) {
  if (grads.params.size() != m.params.size() ||
      opt.velocity.size() != m.params.size()) {
    throw std::invalid_argument("sgd_step: shape mismatch");
  }
  const double lr_ext =
      cosine_lr(opt.base_lr_extractor_and_s, opt.step, opt.total_steps);
  const double lr_head = cosine_lr(opt.base_lr_head, opt.step, opt.total_steps);
  const std::size_t head_start = m.dims.off_w3();
  for (std::size_t i = 0; i < m.params.size(); ++i) {
    opt.velocity[i] = opt.momentum * opt.velocity[i] + grads.params[i];
    m.params[i] -= (i < head_start ? lr_ext : lr_head) * opt.velocity[i];
  }
  opt.velocity_s = opt.momentum * opt.velocity_s + grads.s;
  m.s -= lr_ext * opt.velocity_s;
  if (m.s < opt.s_min) m.s = opt.s_min;
  if (m.s > opt.s_max) m.s = opt.s_max;
  ++opt.step;
}

} // namespace readapt
