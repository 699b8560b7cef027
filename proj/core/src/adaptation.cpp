#include "readapt/adaptation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "readapt/pseudo_label.hpp"

namespace readapt {

Strategy strategy_from_string(const std::string& name) {
  if (name == "renyi") return Strategy::renyi;
  if (name == "shannon") return Strategy::shannon;
  if (name == "random") return Strategy::random;
  throw std::invalid_argument("unknown selection strategy '" + name +
                              "', expected renyi, shannon or random");
}

std::string strategy_name(Strategy s) {
  switch (s) {
    case Strategy::renyi: return "renyi";
    case Strategy::shannon: return "shannon";
    case Strategy::random: return "random";
  }
  throw std::logic_error("strategy_name: bad enum value");
}

std::vector<std::string> AdaConfig::problems() const {
  std::vector<std::string> problems;
  if (hidden < 1) problems.push_back("hidden must be >= 1");
  if (d_feat < 1) problems.push_back("d_feat must be >= 1");
  if (!(s_init > 0.0 && s_init < 1.0)) {
    problems.push_back("s_init must lie in (0, 1)");
  }
  if (rounds < 0) problems.push_back("rounds must be >= 0");
  if (rounds > 0) {
    if (!(budget_fraction > 0.0 && budget_fraction <= 1.0)) {
      problems.push_back("budget_fraction must lie in (0, 1]");
    }
    if (!(per_round_fraction > 0.0 && per_round_fraction <= 1.0)) {
      problems.push_back("per_round_fraction must lie in (0, 1]");
    }
    if (std::abs(per_round_fraction * rounds - budget_fraction) > 1e-9) {
      problems.push_back(
          "per_round_fraction times rounds must equal budget_fraction");
    }
  }
  if (pretrain_epochs < 0) problems.push_back("pretrain_epochs must be >= 0");
  if (rounds > 0 && round_epochs < 1) {
    problems.push_back("round_epochs must be >= 1");
  }
  if (batch < 1) problems.push_back("batch must be >= 1");
  if (!(lambda_dom >= 0.0)) problems.push_back("lambda_dom must be >= 0");
  if (!(lambda_pred >= 0.0)) problems.push_back("lambda_pred must be >= 0");
  if (!(lambda_c >= 0.0)) problems.push_back("lambda_c must be >= 0");
  if (k < 1) problems.push_back("k must be >= 1");
  if (contrastive_subset < 1) {
    problems.push_back("contrastive_subset must be >= 1");
  }
  if (!(lr_extractor > 0.0)) problems.push_back("lr_extractor must be > 0");
  if (!(lr_head > 0.0)) problems.push_back("lr_head must be > 0");
  return problems;
}

void AdaConfig::validate() const {
  const std::vector<std::string> found = problems();
  if (!found.empty()) {
    std::string msg = "invalid adaptation config:";
    for (const std::string& p : found) msg += " " + p + ";";
    throw std::invalid_argument(msg);
  }
}

namespace {

std::vector<std::size_t> split_budget(std::size_t total, int rounds) {
  std::vector<std::size_t> out(static_cast<std::size_t>(rounds), 0);
  if (rounds == 0) return out;
  const std::size_t base = total / static_cast<std::size_t>(rounds);
  std::size_t rem = total % static_cast<std::size_t>(rounds);
  for (auto& b : out) {
    b = base + (rem > 0 ? 1 : 0);
    if (rem > 0) --rem;
  }
  return out;
}

double mean_u_dom(const EvidentialModel& m,
                  const std::map<std::int64_t, std::vector<double>>& inputs,
                  const std::vector<std::int64_t>& ids) {
  if (ids.empty()) return 0.0;
  RenyiOrder s(m.s);
  double acc = 0.0;
  for (std::int64_t id : ids) {
    acc += u_dom(forward(m, inputs.at(id)).dirichlet, s);
  }
  return acc / static_cast<double>(ids.size());
}

} // namespace

AdaSession::AdaSession(const DatasetBundle& data, const AdaConfig& config)
    : AdaSession(data, config, LabelOracle{}) {}

AdaSession::AdaSession(const DatasetBundle& data, const AdaConfig& config,
                       LabelOracle oracle)
    : data_(data),
      config_(config),
      oracle_(std::move(oracle)),
      shuffle_stream_(derive_seed(config.seed, "shuffle")),
      subsets_stream_(derive_seed(config.seed, "subsets")),
      align_stream_(derive_seed(config.seed, "align")),
      random_select_stream_(derive_seed(config.seed, "select_random")) {
  config_.validate();
  if (data_.samples.empty()) {
    throw std::invalid_argument("AdaSession: empty dataset");
  }

  for (const Sample& s : data_.samples) {
    true_labels_[s.id] = s.label;
    if (s.split == Split::test) {
      (s.domain == Domain::source ? source_test_ids_ : target_test_ids_)
          .push_back(s.id);
      inputs_[s.id] = s.x;
      continue;
    }
    inputs_[s.id] = s.x;
    if (s.domain == Domain::source) {
      pools_.source_labeled.insert(s.id);
      labels_[s.id] = s.label;
    } else {
      pools_.target_unlabeled.insert(s.id);
    }
  }
  if (pools_.source_labeled.empty()) {
    throw std::invalid_argument("AdaSession: no source training samples");
  }
  if (!oracle_) {
    oracle_ = [this](std::int64_t id) {
      auto it = true_labels_.find(id);
      if (it == true_labels_.end()) {
        throw std::runtime_error("label oracle has no entry for id " +
                                 std::to_string(id));
      }
      return it->second;
    };
  }

  const std::size_t n_tu = pools_.target_unlabeled.size();
  budget_total_ = static_cast<std::size_t>(
      std::llround(config_.budget_fraction * static_cast<double>(n_tu)));
  if (config_.rounds > 0) {
    if (budget_total_ > n_tu) {
      throw std::invalid_argument("AdaSession: budget exceeds unlabeled pool");
    }
    round_budgets_ = split_budget(budget_total_, config_.rounds);
    for (std::size_t b : round_budgets_) {
      if (b < 1) {
        throw std::invalid_argument(
            "AdaSession: budget too small to give every round a sample");
      }
    }
  }

  ModelDims dims;
  dims.d_in = static_cast<std::size_t>(data_.spec.d_in);
  dims.hidden = config_.hidden;
  dims.d_feat = config_.d_feat;
  dims.num_classes = static_cast<std::size_t>(data_.spec.num_classes);
  model_ = init_model(dims, derive_seed(config_.seed, "init"));
  model_.s = config_.s_init;
  if (model_.s < 0.01) model_.s = 0.01;
  if (model_.s > 0.99) model_.s = 0.99;

  summary_.strategy = strategy_name(config_.strategy);
  summary_.seed = config_.seed;
  summary_.n_source_train = pools_.source_labeled.size();
  summary_.n_target_train = n_tu;
  summary_.budget_total = config_.rounds > 0 ? budget_total_ : 0;
}

MetricsRecord AdaSession::evaluate_pool(
    const std::vector<std::int64_t>& ids) const {
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(ids.size());
  for (std::int64_t id : ids) {
    const ProbVector p = posterior_predictive(forward(model_, inputs_.at(id)).dirichlet);
    int arg = 0;
    for (std::size_t c = 1; c < p.size(); ++c) {
      if (p[c] > p[arg]) arg = static_cast<int>(c);
    }
    pairs.emplace_back(true_labels_.at(id), arg);
  }
  return evaluate(pairs, data_.spec.num_classes);
}

AdaSession::Evaluation AdaSession::evaluate_tests() const {
  Evaluation ev;
  ev.source_test = evaluate_pool(source_test_ids_);
  ev.target_test = evaluate_pool(target_test_ids_);
  ev.u_dom_source = mean_u_dom(model_, inputs_, source_test_ids_);
  ev.u_dom_target = mean_u_dom(model_, inputs_, target_test_ids_);
  return ev;
}

std::vector<ScoredSample> AdaSession::score_current() const {
  if (config_.strategy == Strategy::shannon) {
    return score_unlabeled_shannon(model_, inputs_, pools_,
                                   config_.lambda_dom, config_.lambda_pred);
  }
  return score_unlabeled(model_, inputs_, pools_, config_.lambda_dom,
                         config_.lambda_pred);
}

void AdaSession::train_phase(int epochs,
                             const std::vector<std::int64_t>& train_ids,
                             const TrainingData& data,
                             const LossConfig& loss_config,
                             std::vector<double>* epoch_loss,
                             LossBreakdown* final_epoch) {
  if (epochs <= 0 || train_ids.empty()) return;
  const std::size_t steps_per_epoch =
      (train_ids.size() + config_.batch - 1) / config_.batch;
  OptimizerState opt =
      make_optimizer(model_, static_cast<std::uint64_t>(epochs) *
                                 steps_per_epoch,
                     config_.lr_extractor, config_.lr_head);

  // Alignment minibatches cycle through a shuffled unlabeled pool.
  std::vector<std::int64_t> align_pool(pools_.target_unlabeled.begin(),
                                       pools_.target_unlabeled.end());
  std::size_t align_pos = align_pool.size(); // forces initial shuffle
  auto next_align_batch = [&]() {
    std::vector<std::int64_t> out;
    if (!loss_config.include_align || align_pool.empty()) return out;
    const std::size_t want = std::min(config_.batch, align_pool.size());
    out.reserve(want);
    for (std::size_t t = 0; t < want; ++t) {
      if (align_pos >= align_pool.size()) {
        align_stream_.shuffle(align_pool);
        align_pos = 0;
      }
      out.push_back(align_pool[align_pos++]);
    }
    return out;
  };

  std::vector<std::int64_t> order(train_ids);
  for (int e = 0; e < epochs; ++e) {
    shuffle_stream_.shuffle(order);
    double total_acc = 0.0;
    LossBreakdown comp_acc;
    std::size_t batches = 0;
    for (std::size_t pos = 0; pos < order.size(); pos += config_.batch) {
      TrainingBatch batch;
      const std::size_t end = std::min(pos + config_.batch, order.size());
      batch.edl_ids.assign(order.begin() + pos, order.begin() + end);
      batch.align_ids = next_align_batch();
      if (loss_config.include_contrastive) {
        for (std::int64_t id : batch.edl_ids) {
          if (pools_.source_labeled.count(id) ||
              pools_.target_labeled.count(id)) {
            batch.contrastive_ids.push_back(id);
          }
        }
        batch.subsets = draw_contrastive_subsets(
            batch.contrastive_ids, data.labels, pools_,
            config_.contrastive_subset, subsets_stream_);
      }
      BackwardResult res = backward(model_, data, pools_, batch, loss_config);
      sgd_step(model_, res.grads, opt);
      ++total_sgd_steps_;
      total_acc += res.loss.total;
      comp_acc.nll += res.loss.nll;
      comp_acc.kl += res.loss.kl;
      comp_acc.edl += res.loss.edl;
      comp_acc.align += res.loss.align;
      comp_acc.contrastive += res.loss.contrastive;
      comp_acc.s_reg += res.loss.s_reg;
      comp_acc.total += res.loss.total;
      ++batches;
    }
    if (epoch_loss != nullptr) {
      epoch_loss->push_back(total_acc / static_cast<double>(batches));
    }
    if (final_epoch != nullptr && e == epochs - 1) {
      const double inv = 1.0 / static_cast<double>(batches);
      final_epoch->nll = comp_acc.nll * inv;
      final_epoch->kl = comp_acc.kl * inv;
      final_epoch->edl = comp_acc.edl * inv;
      final_epoch->align = comp_acc.align * inv;
      final_epoch->contrastive = comp_acc.contrastive * inv;
      final_epoch->s_reg = comp_acc.s_reg * inv;
      final_epoch->total = comp_acc.total * inv;
    }
  }
}

void AdaSession::pretrain() {
  if (pretrained_) {
    throw std::logic_error("AdaSession: pretrain called twice");
  }
  pretrained_ = true;

  TrainingData data;
  data.inputs = inputs_;
  data.labels = labels_;
  LossConfig lc;
  lc.lambda_dom = config_.lambda_dom;
  lc.lambda_pred = config_.lambda_pred;
  lc.lambda_c = config_.lambda_c;
  lc.include_align = false;
  lc.include_contrastive = false;
  lc.include_s_reg = false;

  std::vector<std::int64_t> train_ids(pools_.source_labeled.begin(),
                                      pools_.source_labeled.end());
  train_phase(config_.pretrain_epochs, train_ids, data, lc,
              &summary_.pretrain_epoch_loss, nullptr);

  Evaluation ev = evaluate_tests();
  summary_.source_test_before = ev.source_test;
  summary_.target_test_before = ev.target_test;
  summary_.u_dom_source_before = ev.u_dom_source;
  summary_.u_dom_target_before = ev.u_dom_target;
}

RoundReport AdaSession::run_round(int round_index) {
  if (!pretrained_) {
    throw std::logic_error("AdaSession: run_round before pretrain");
  }
  if (round_index != next_round_) {
    throw std::logic_error("AdaSession: rounds must run in order, expected " +
                           std::to_string(next_round_));
  }
  if (round_index < 1 ||
      round_index > static_cast<int>(round_budgets_.size())) {
    throw std::logic_error("AdaSession: round index out of range");
  }
  ++next_round_;

  RoundReport report;
  report.round_index = round_index;
  report.budget = round_budgets_[static_cast<std::size_t>(round_index - 1)];
  if (report.budget == 0) {
    report.labeled_target_size = pools_.target_labeled.size();
    report.s_after = model_.s;
    report.target_test = evaluate_pool(target_test_ids_);
    reports_.push_back(report);
    return report;
  }

  // Feature snapshot for selection, diversity and pseudo-labels.
  FeatureMap features;
  for (const auto& [id, x] : inputs_) {
    if (pools_.source_labeled.count(id) || pools_.target_labeled.count(id) ||
        pools_.target_unlabeled.count(id)) {
      features[id] = extract_features(model_, x);
    }
  }

  std::vector<ScoredSample> scores = score_current();
  for (const ScoredSample& s : scores) {
    report.scores.push_back(
        ScoredRecord{s.id, s.score.u_dom, s.score.u_pred, s.score.u_total});
  }

  std::vector<std::int64_t> selected;
  if (config_.strategy == Strategy::random) {
    std::vector<std::int64_t> ids(pools_.target_unlabeled.begin(),
                                  pools_.target_unlabeled.end());
    random_select_stream_.shuffle(ids);
    ids.resize(std::min<std::size_t>(report.budget, ids.size()));
    std::sort(ids.begin(), ids.end());
    selected = ids;
    report.candidate_ids = ids;
  } else {
    SelectionRound round;
    round.round_index = round_index;
    round.budget = report.budget;
    report.candidate_ids = select_candidates(scores, round);
    selected = diversity_filter(report.candidate_ids, features, scores,
                                report.budget);
  }
  report.selected_ids = selected;

  report.selected_class_counts.assign(
      static_cast<std::size_t>(data_.spec.num_classes), 0);
  for (std::int64_t id : selected) {
    pools_.mark_labeled(id);
    const int label = oracle_(id);
    labels_[id] = label;
    ++report.selected_class_counts[static_cast<std::size_t>(label)];
  }
  pools_.validate();

  // Fresh pseudo-labels over the updated pools, same feature snapshot.
  LabelContext ctx = make_label_context(features, labels_, pools_,
                                        data_.spec.num_classes, config_.k);
  std::map<std::int64_t, std::vector<int>> pls = pseudo_label_all(ctx);
  std::size_t pls_size_sum = 0;
  for (const auto& [id, set] : pls) {
    if (!set.empty()) {
      ++report.pls_nonempty;
      pls_size_sum += set.size();
    }
  }
  report.pls_mean_size =
      report.pls_nonempty > 0
          ? static_cast<double>(pls_size_sum) /
                static_cast<double>(report.pls_nonempty)
          : 0.0;

  TrainingData data;
  data.inputs = inputs_;
  data.labels = labels_;
  data.pls = pls;
  LossConfig lc;
  lc.lambda_dom = config_.lambda_dom;
  lc.lambda_pred = config_.lambda_pred;
  lc.lambda_c = config_.lambda_c;

  std::vector<std::int64_t> train_ids(pools_.source_labeled.begin(),
                                      pools_.source_labeled.end());
  train_ids.insert(train_ids.end(), pools_.target_labeled.begin(),
                   pools_.target_labeled.end());
  for (const auto& [id, set] : pls) {
    if (!set.empty()) train_ids.push_back(id);
  }
  std::sort(train_ids.begin(), train_ids.end());

  train_phase(config_.round_epochs, train_ids, data, lc, &report.epoch_loss,
              &report.final_epoch_loss);

  report.target_test = evaluate_pool(target_test_ids_);
  report.s_after = model_.s;
  report.labeled_target_size = pools_.target_labeled.size();
  reports_.push_back(report);
  return report;
}

RunResult AdaSession::finish() {
  if (!pretrained_) {
    throw std::logic_error("AdaSession: finish before pretrain");
  }
  Evaluation ev = evaluate_tests();
  summary_.source_test_after = ev.source_test;
  summary_.target_test_after = ev.target_test;
  summary_.u_dom_source_after = ev.u_dom_source;
  summary_.u_dom_target_after = ev.u_dom_target;
  summary_.s_final = model_.s;
  summary_.labeled_target_final = pools_.target_labeled.size();

  RunResult result;
  result.model = model_;
  result.optimizer_step = total_sgd_steps_;
  result.rounds = reports_;
  result.summary = summary_;
  return result;
}

RunResult run_ada(const DatasetBundle& data, const AdaConfig& config) {
  AdaSession session(data, config);
  session.pretrain();
  for (int r = 1; r <= config.rounds; ++r) {
    session.run_round(r);
  }
  return session.finish();
}

} // namespace readapt
