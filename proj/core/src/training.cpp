#include "readapt/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>
#include <string>

#include "readapt/special_functions.hpp"

namespace readapt {

namespace {

struct BatchWorkspace {
  std::map<std::int64_t, ForwardCache> caches;
  FeatureMap features; // for contrastive participants and pools
  std::vector<EdlEntry> edl_entries;
  std::size_t n_labeled = 0;
  std::size_t n_pseudo = 0;
};

const std::vector<double>& input_of(const TrainingData& data, std::int64_t id) {
  auto it = data.inputs.find(id);
  if (it == data.inputs.end()) {
    throw std::invalid_argument("training: no input vector for id " +
                                std::to_string(id));
  }
  return it->second;
}

BatchWorkspace prepare(const EvidentialModel& m, const TrainingData& data,
                       const PoolState& pools, const TrainingBatch& batch,
                       const LossConfig& config) {
  BatchWorkspace ws;
  std::set<std::int64_t> cached_ids(batch.edl_ids.begin(), batch.edl_ids.end());
  cached_ids.insert(batch.align_ids.begin(), batch.align_ids.end());
  if (config.include_contrastive && !batch.contrastive_ids.empty()) {
    cached_ids.insert(pools.source_labeled.begin(),
                      pools.source_labeled.end());
    cached_ids.insert(pools.target_labeled.begin(),
                      pools.target_labeled.end());
  }
  for (std::int64_t id : cached_ids) {
    ws.caches.emplace(id, forward_cached(m, input_of(data, id)));
  }
  if (config.include_contrastive && !batch.contrastive_ids.empty()) {
    for (std::int64_t id : pools.source_labeled) {
      ws.features[id] = ws.caches.at(id).features;
    }
    for (std::int64_t id : pools.target_labeled) {
      ws.features[id] = ws.caches.at(id).features;
    }
  }
  for (std::int64_t id : batch.edl_ids) {
    const ForwardCache& cache = ws.caches.at(id);
    EdlEntry entry{DirichletParams(cache.alpha), false, -1, {}};
    auto lbl = data.labels.find(id);
    if (lbl != data.labels.end()) {
      entry.is_labeled = true;
      entry.label = lbl->second;
      ++ws.n_labeled;
    } else {
      auto pit = data.pls.find(id);
      if (pit == data.pls.end()) {
        throw std::invalid_argument(
            "training: id " + std::to_string(id) +
            " has neither a label nor a pseudo-label set");
      }
      entry.pls = pit->second;
      if (!entry.pls.empty()) ++ws.n_pseudo;
    }
    ws.edl_entries.push_back(std::move(entry));
  }
  return ws;
}

// Gradient of u_pred and of the predictive-mean entropy at (alpha, s).
struct UncertaintyGrads {
  std::vector<double> d_alpha;
  double d_s = 0.0;
  double value = 0.0;
};

UncertaintyGrads u_pred_grads(const std::vector<double>& alpha, double alpha0,
                              double s) {
  const std::size_t C = alpha.size();
  std::vector<double> t(C);
  double t_max = -std::numeric_limits<double>::infinity();
  const double denom = log_gamma_ratio(alpha0, s);
  for (std::size_t c = 0; c < C; ++c) {
    t[c] = log_gamma_ratio(alpha[c], s) - denom;
    t_max = std::max(t_max, t[c]);
  }
  double acc = 0.0;
  std::vector<double> w(C);
  for (std::size_t c = 0; c < C; ++c) {
    w[c] = std::exp(t[c] - t_max);
    acc += w[c];
  }
  for (std::size_t c = 0; c < C; ++c) w[c] /= acc;
  const double log_T = t_max + std::log(acc);
  const double inv1ms = 1.0 / (1.0 - s);

  UncertaintyGrads g;
  g.value = log_T * inv1ms;
  const double psi_a0_diff = digamma(alpha0 + s) - digamma(alpha0);
  g.d_alpha.resize(C);
  double ds_acc = 0.0;
  const double psi_a0s = digamma(alpha0 + s);
  for (std::size_t c = 0; c < C; ++c) {
    g.d_alpha[c] = inv1ms * (w[c] * (digamma(alpha[c] + s) - digamma(alpha[c]))
                             - psi_a0_diff);
    ds_acc += w[c] * (digamma(alpha[c] + s) - psi_a0s);
  }
  g.d_s = log_T * inv1ms * inv1ms + inv1ms * ds_acc;
  return g;
}

UncertaintyGrads mean_entropy_grads(const std::vector<double>& alpha,
                                    double alpha0, double s) {
  const std::size_t C = alpha.size();
  double S = 0.0;
  std::vector<double> omega(C), omega_s(C);
  for (std::size_t c = 0; c < C; ++c) {
    omega[c] = alpha[c] / alpha0;
    omega_s[c] = std::pow(omega[c], s);
    S += omega_s[c];
  }
  const double inv1ms = 1.0 / (1.0 - s);
  UncertaintyGrads g;
  g.value = std::log(S) * inv1ms;
  g.d_alpha.resize(C);
  double ds_acc = 0.0;
  for (std::size_t c = 0; c < C; ++c) {
    g.d_alpha[c] = (s * inv1ms / alpha0) * (std::pow(omega[c], s - 1.0) - S) / S;
    ds_acc += omega_s[c] * std::log(omega[c]);
  }
  g.d_s = std::log(S) * inv1ms * inv1ms + inv1ms * ds_acc / S;
  return g;
}

void check_finite(const std::vector<double>& v, const char* term) {
  for (double x : v) {
    if (!std::isfinite(x)) {
      throw std::runtime_error(std::string("backward: non-finite gradient "
                                           "from the ") + term + " term");
    }
  }
}

class GradientAccumulator {
 public:
  GradientAccumulator(const EvidentialModel& m,
                      std::map<std::int64_t, ForwardCache>& caches)
      : model_(m), caches_(caches) {
    grads_.params.assign(m.dims.param_count(), 0.0);
    grads_.s = 0.0;
  }

  // dL/dlogits for one sample; pushes through the head and stores the
  // feature-space remainder for the extractor pass.
  void add_logit_grad(std::int64_t id, const std::vector<double>& dz) {
    const ModelDims& d = model_.dims;
    const ForwardCache& cache = caches_.at(id);
    double* gw3 = grads_.params.data() + d.off_w3();
    double* gb3 = grads_.params.data() + d.off_b3();
    std::vector<double>& gf = feature_grad(id);
    const double* w3 = model_.params.data() + d.off_w3();
    for (std::size_t r = 0; r < d.num_classes; ++r) {
      const double dzr = dz[r];
      if (dzr == 0.0) continue;
      gb3[r] += dzr;
      double* gw3r = gw3 + r * d.d_feat;
      const double* w3r = w3 + r * d.d_feat;
      for (std::size_t c = 0; c < d.d_feat; ++c) {
        gw3r[c] += dzr * cache.features[c];
        gf[c] += dzr * w3r[c];
      }
    }
  }

  void add_feature_grad(std::int64_t id, const std::vector<double>& gf,
                        double scale) {
    std::vector<double>& acc = feature_grad(id);
    for (std::size_t c = 0; c < acc.size(); ++c) acc[c] += scale * gf[c];
  }

  void add_s_grad(double g) { grads_.s += g; }

  // Chains the accumulated feature gradients through both tanh layers.
  Gradients finish() {
    const ModelDims& d = model_.dims;
    std::vector<double> da2(d.d_feat), gh1(d.hidden), da1(d.hidden);
    for (auto& [id, gf] : feature_grads_) {
      const ForwardCache& cache = caches_.at(id);
      for (std::size_t r = 0; r < d.d_feat; ++r) {
        da2[r] = gf[r] * (1.0 - cache.features[r] * cache.features[r]);
      }
      double* gw2 = grads_.params.data() + d.off_w2();
      double* gb2 = grads_.params.data() + d.off_b2();
      const double* w2 = model_.params.data() + d.off_w2();
      std::fill(gh1.begin(), gh1.end(), 0.0);
      for (std::size_t r = 0; r < d.d_feat; ++r) {
        const double v = da2[r];
        if (v == 0.0) continue;
        gb2[r] += v;
        double* gw2r = gw2 + r * d.hidden;
        const double* w2r = w2 + r * d.hidden;
        for (std::size_t c = 0; c < d.hidden; ++c) {
          gw2r[c] += v * cache.h1[c];
          gh1[c] += v * w2r[c];
        }
      }
      double* gw1 = grads_.params.data() + d.off_w1();
      double* gb1 = grads_.params.data() + d.off_b1();
      for (std::size_t r = 0; r < d.hidden; ++r) {
        da1[r] = gh1[r] * (1.0 - cache.h1[r] * cache.h1[r]);
        const double v = da1[r];
        if (v == 0.0) continue;
        gb1[r] += v;
        double* gw1r = gw1 + r * d.d_in;
        for (std::size_t c = 0; c < d.d_in; ++c) {
          gw1r[c] += v * cache.x[c];
        }
      }
    }
    return std::move(grads_);
  }

 private:
  std::vector<double>& feature_grad(std::int64_t id) {
    auto [it, fresh] = feature_grads_.try_emplace(id);
    if (fresh) it->second.assign(model_.dims.d_feat, 0.0);
    return it->second;
  }

  const EvidentialModel& model_;
  std::map<std::int64_t, ForwardCache>& caches_;
  std::map<std::int64_t, std::vector<double>> feature_grads_;
  Gradients grads_;
};

// dz for one (alpha, y) pair of the evidential loss, scaled by weight.
void accumulate_edl_logit_grad(const ForwardCache& cache, int y, double weight,
                               std::vector<double>& dz) {
  const std::size_t C = cache.alpha.size();
  const double a0 = cache.alpha0;
  // KL part shares alpha_hat across components.
  const double ahat_sum = a0 - cache.alpha[y] + 1.0;
  const double trigamma_sum = trigamma(ahat_sum);
  const double common = (ahat_sum - static_cast<double>(C)) * trigamma_sum;
  for (std::size_t c = 0; c < C; ++c) {
    if (cache.clamped[c]) continue;
    double g = cache.alpha[c] / a0; // nll: omega_c
    if (static_cast<int>(c) == y) {
      g -= 1.0;
    } else {
      g += ((cache.alpha[c] - 1.0) * trigamma(cache.alpha[c]) - common) *
           cache.alpha[c];
    }
    dz[c] += weight * g;
  }
}

} // namespace

LossBreakdown compute_loss(const EvidentialModel& m, const TrainingData& data,
                           const PoolState& pools, const TrainingBatch& batch,
                           const LossConfig& config) {
  BatchWorkspace ws = prepare(m, data, pools, batch, config);
  LossBreakdown bd;
  EdlParts parts = edl_loss_parts(ws.edl_entries);
  bd.nll = parts.nll;
  bd.kl = parts.kl;
  bd.edl = parts.total();
  if (config.include_align && !batch.align_ids.empty()) {
    std::vector<DirichletParams> align_batch;
    align_batch.reserve(batch.align_ids.size());
    for (std::int64_t id : batch.align_ids) {
      align_batch.emplace_back(ws.caches.at(id).alpha);
    }
    bd.align = alignment_loss(align_batch, RenyiOrder(m.s), config.lambda_dom,
                              config.lambda_pred);
  }
  if (config.include_contrastive && !batch.contrastive_ids.empty()) {
    bd.contrastive = contrastive_loss(batch.contrastive_ids, ws.features,
                                      data.labels, pools, batch.subsets, false)
                         .loss;
  }
  if (config.include_s_reg) {
    bd.s_reg = s_regularizer(RenyiOrder(m.s));
  }
  bd.total = bd.edl + bd.align + config.lambda_c * bd.contrastive + bd.s_reg;
  return bd;
}

BackwardResult backward(const EvidentialModel& m, const TrainingData& data,
                        const PoolState& pools, const TrainingBatch& batch,
                        const LossConfig& config) {
  BatchWorkspace ws = prepare(m, data, pools, batch, config);
  GradientAccumulator acc(m, ws.caches);
  LossBreakdown bd;

  // Evidential term.
  EdlParts parts = edl_loss_parts(ws.edl_entries);
  bd.nll = parts.nll;
  bd.kl = parts.kl;
  bd.edl = parts.total();
  {
    const double w_labeled =
        ws.n_labeled > 0 ? 1.0 / static_cast<double>(ws.n_labeled) : 0.0;
    const double w_pseudo =
        ws.n_pseudo > 0 ? 1.0 / static_cast<double>(ws.n_pseudo) : 0.0;
    std::vector<double> dz(m.dims.num_classes);
    for (std::size_t i = 0; i < batch.edl_ids.size(); ++i) {
      const std::int64_t id = batch.edl_ids[i];
      const EdlEntry& entry = ws.edl_entries[i];
      const ForwardCache& cache = ws.caches.at(id);
      std::fill(dz.begin(), dz.end(), 0.0);
      if (entry.is_labeled) {
        accumulate_edl_logit_grad(cache, entry.label, w_labeled, dz);
      } else if (!entry.pls.empty()) {
        const double w =
            w_pseudo / static_cast<double>(entry.pls.size());
        for (int y : entry.pls) {
          accumulate_edl_logit_grad(cache, y, w, dz);
        }
      } else {
        continue;
      }
      check_finite(dz, "evidential");
      acc.add_logit_grad(id, dz);
    }
  }

  // Alignment term.
  if (config.include_align && !batch.align_ids.empty()) {
    const double s = m.s;
    const double w = 1.0 / static_cast<double>(batch.align_ids.size());
    std::vector<double> dz(m.dims.num_classes);
    double align_value = 0.0;
    for (std::int64_t id : batch.align_ids) {
      const ForwardCache& cache = ws.caches.at(id);
      UncertaintyGrads pred = u_pred_grads(cache.alpha, cache.alpha0, s);
      UncertaintyGrads ent = mean_entropy_grads(cache.alpha, cache.alpha0, s);
      double pred_value = pred.value < 0.0 ? 0.0 : pred.value;
      double dom_value = ent.value - pred_value;
      bool dom_clamped = false;
      if (dom_value < 0.0) {
        if (dom_value < -1e-8) {
          throw std::logic_error(
              "backward: domain uncertainty below -1e-8 in alignment term");
        }
        dom_value = 0.0;
        dom_clamped = true;
      }
      align_value +=
          config.lambda_dom * dom_value + config.lambda_pred * pred_value;

      double ds = config.lambda_pred * pred.d_s;
      std::fill(dz.begin(), dz.end(), 0.0);
      for (std::size_t c = 0; c < dz.size(); ++c) {
        double da = config.lambda_pred * pred.d_alpha[c];
        if (!dom_clamped) {
          da += config.lambda_dom * (ent.d_alpha[c] - pred.d_alpha[c]);
        }
        if (!cache.clamped[c]) dz[c] = w * da * cache.alpha[c];
      }
      if (!dom_clamped) {
        ds += config.lambda_dom * (ent.d_s - pred.d_s);
      }
      check_finite(dz, "alignment");
      if (!std::isfinite(ds)) {
        throw std::runtime_error(
            "backward: non-finite gradient from the alignment term");
      }
      acc.add_logit_grad(id, dz);
      acc.add_s_grad(w * ds);
    }
    bd.align = align_value * w;
  }

  // Contrastive term.
  if (config.include_contrastive && !batch.contrastive_ids.empty()) {
    ContrastiveResult con =
        contrastive_loss(batch.contrastive_ids, ws.features, data.labels,
                         pools, batch.subsets, true);
    bd.contrastive = con.loss;
    for (const auto& [id, gf] : con.feature_grads) {
      check_finite(gf, "contrastive");
      acc.add_feature_grad(id, gf, config.lambda_c);
    }
  }

  // Order regularizer.
  if (config.include_s_reg) {
    bd.s_reg = s_regularizer(RenyiOrder(m.s));
    acc.add_s_grad(2.0 * (m.s - 0.5));
  }

  bd.total = bd.edl + bd.align + config.lambda_c * bd.contrastive + bd.s_reg;

  BackwardResult result;
  result.loss = bd;
  result.grads = acc.finish();
  check_finite(result.grads.params, "combined");
  if (!std::isfinite(result.grads.s)) {
    throw std::runtime_error(
        "backward: non-finite gradient for the entropic order");
  }
  return result;
}

} // namespace readapt
