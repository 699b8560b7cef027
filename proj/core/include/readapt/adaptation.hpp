#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "readapt/dataset.hpp"
#include "readapt/losses.hpp"
#include "readapt/metrics.hpp"
#include "readapt/model.hpp"
#include "readapt/optimizer.hpp"
#include "readapt/pool.hpp"
#include "readapt/rng.hpp"
#include "readapt/selection.hpp"
#include "readapt/training.hpp"

namespace readapt {

enum class Strategy { renyi, shannon, random };

Strategy strategy_from_string(const std::string& name);
std::string strategy_name(Strategy s);

struct AdaConfig {
  std::size_t hidden = 32;
  std::size_t d_feat = 32;
  double s_init = 0.5;
  int rounds = 5;
  double budget_fraction = 0.05;
  double per_round_fraction = 0.01;
  int pretrain_epochs = 100;
  int round_epochs = 30;
  std::size_t batch = 16;
  double lambda_dom = 7.0;
  double lambda_pred = 0.5;
  double lambda_c = 1.0;
  std::size_t k = 5;
  std::size_t contrastive_subset = 8;
  double lr_extractor = 5e-4;
  double lr_head = 5e-3;
  Strategy strategy = Strategy::renyi;
  std::uint64_t seed = 0;

  std::vector<std::string> problems() const; // empty means valid
  void validate() const;                     // throws listing every problem
};

struct ScoredRecord {
  std::int64_t id = 0;
  double u_dom = 0.0;
  double u_pred = 0.0;
  double u_total = 0.0;
};

struct RoundReport {
  int round_index = 0;
  std::size_t budget = 0;
  std::vector<ScoredRecord> scores; // unlabeled pool at selection time
  std::vector<std::int64_t> candidate_ids;
  std::vector<std::int64_t> selected_ids;
  std::vector<std::int64_t> selected_class_counts; // by true class
  std::size_t pls_nonempty = 0;   // after the selection was merged
  double pls_mean_size = 0.0;     // over nonempty sets
  std::vector<double> epoch_loss; // mean batch total per epoch
  LossBreakdown final_epoch_loss; // component means of the last epoch
  MetricsRecord target_test;
  double s_after = 0.5;
  std::size_t labeled_target_size = 0;
};

struct RunSummary {
  std::string strategy;
  std::uint64_t seed = 0;
  std::size_t n_source_train = 0;
  std::size_t n_target_train = 0;
  std::size_t budget_total = 0;
  std::size_t labeled_target_final = 0;
  MetricsRecord source_test_before, target_test_before;
  MetricsRecord source_test_after, target_test_after;
  double u_dom_source_before = 0.0, u_dom_target_before = 0.0;
  double u_dom_source_after = 0.0, u_dom_target_after = 0.0;
  double s_final = 0.5;
  std::vector<double> pretrain_epoch_loss;
};

struct RunResult {
  EvidentialModel model;
  std::uint64_t optimizer_step = 0; // total SGD steps over all phases
  std::vector<RoundReport> rounds;
  RunSummary summary;
};

// Multi-round active adaptation over one dataset bundle. The labeling
// oracle defaults to the bundle's own labels; a missing id aborts.
class AdaSession {
 public:
  using LabelOracle = std::function<int(std::int64_t)>;

  AdaSession(const DatasetBundle& data, const AdaConfig& config);
  AdaSession(const DatasetBundle& data, const AdaConfig& config,
             LabelOracle oracle);

  // Source-only training; captures the pre-adaptation evaluations.
  void pretrain();

  // One selection + training round; round_index is 1-based and rounds
  // must run in order. A zero budget leaves the state untouched.
  RoundReport run_round(int round_index);

  // Final evaluations; leaves the session usable for inspection.
  RunResult finish();

  const EvidentialModel& model() const { return model_; }
  const PoolState& pools() const { return pools_; }
  const std::vector<std::size_t>& round_budgets() const {
    return round_budgets_;
  }

 private:
  struct Evaluation {
    MetricsRecord source_test, target_test;
    double u_dom_source = 0.0, u_dom_target = 0.0;
  };

  std::vector<ScoredSample> score_current() const;
  Evaluation evaluate_tests() const;
  MetricsRecord evaluate_pool(const std::vector<std::int64_t>& ids) const;
  void train_phase(int epochs, const std::vector<std::int64_t>& train_ids,
                   const TrainingData& data, const LossConfig& loss_config,
                   std::vector<double>* epoch_loss,
                   LossBreakdown* final_epoch);

  const DatasetBundle& data_;
  AdaConfig config_;
  LabelOracle oracle_;

  std::map<std::int64_t, std::vector<double>> inputs_; // every sample
  std::map<std::int64_t, int> labels_;                 // revealed labels
  std::map<std::int64_t, int> true_labels_;            // all samples
  std::vector<std::int64_t> source_test_ids_, target_test_ids_;
  PoolState pools_;

  EvidentialModel model_;
  std::uint64_t total_sgd_steps_ = 0;

  RandomStream shuffle_stream_;
  RandomStream subsets_stream_;
  RandomStream align_stream_;
  RandomStream random_select_stream_;

  std::vector<std::size_t> round_budgets_;
  std::size_t budget_total_ = 0;
  int next_round_ = 1;
  bool pretrained_ = false;

  std::vector<RoundReport> reports_;
  RunSummary summary_;
};

// Convenience wrapper: pretrain, all rounds, finish.
RunResult run_ada(const DatasetBundle& data, const AdaConfig& config);

} // namespace readapt
