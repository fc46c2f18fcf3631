#pragma once

// Joint pretraining: stepwise mixture NLL on the remaining pool and held-out
// targets, plus REINFORCE on per-step batch-normalized discounted returns.

#include <Eigen/Dense>
#include <functional>
#include <nlohmann/json.hpp>
#include <span>
#include <string>
#include <vector>

#include "ficbo/episode/episode.hpp"
#include "ficbo/model/model.hpp"
#include "ficbo/prior/priors.hpp"
#include "ficbo/train/optimizer.hpp"

namespace ficbo::train {

struct TrainingConfig {
  double lr = 1e-3;
  double weight_decay = 1e-7;
  int batch_size = 32;
  int n_iterations = 3000;
  int warmup_iterations = 300;
  double gamma = 0.98;
  double lambda_pol = 1.0;
  double grad_clip_norm = 1.0;
  double logprob_clamp = -10.0;
  int warmup_pool_size = 0;  // 0: the batch horizon
  long lr_t0 = 1000;
  long lr_t_mult = 2;
  bool normalize_returns = true;
  std::uint64_t seed = 0;
  int log_every = 0;  // progress lines on stderr; 0 disables

  void validate() const;
};

void to_json(nlohmann::json& j, const TrainingConfig& c);
void from_json(const nlohmann::json& j, TrainingConfig& c);

enum class SelectionMode { Random, Policy };

// A rollout recorded on its own graph, kept alive until the batch update.
struct Rollout {
  nn::Graph graph{true};
  std::vector<nn::Var> nll;       // per step, mean over S_t
  std::vector<nn::Var> log_prob;  // per step; empty in random mode
  std::vector<double> log_prob_value;
  episode::Trajectory trajectory;
};

// Runs one episode of `task` with the model attached. Policy mode samples
// from the policy head.
Rollout rollout(model::Model& model, const prior::TaskInstance& task, SelectionMode mode, Rng& rng);

// Mean over tasks of the mean over steps of the stepwise NLL on S_t, replaying
// the given selections without recording gradients.
double loss_pred(model::Model& model, std::span<const prior::TaskInstance> tasks,
                 std::span<const std::vector<std::size_t>> selections);

// -mean_b sum_t max(log_prob, clamp) * R~_t.
double loss_pol(const std::vector<std::vector<double>>& log_probs, const Eigen::MatrixXd& normalized_returns,
                double clamp = -10.0);

struct IterationStats {
  long iteration = 0;
  SelectionMode mode = SelectionMode::Random;
  double loss_pred = 0.0;
  double loss_pol = 0.0;
  double lr = 0.0;
  double mean_reward = 0.0;
  double grad_norm = 0.0;       // before clipping
  double grad_norm_after = 0.0;
};

// One update on a prepared batch. All tasks must share a horizon.
IterationStats train_step(model::Model& model, AdamW& opt, std::span<const prior::TaskInstance> batch,
                          SelectionMode mode, const TrainingConfig& cfg, double lr, Rng& rng);

using TaskSampler = std::function<prior::TaskInstance(Rng&, int horizon, int pool_size)>;

// Samples tasks from a prior with the given settings; horizon and pool size
// override the shape for one batch.
TaskSampler prior_sampler(prior::PriorKind kind, prior::PriorSettings settings);

struct TrainResult {
  std::vector<IterationStats> history;
};

// The full loop. Metrics are written as CSV to metrics_path when non-empty.
TrainResult train(model::Model& model, const TaskSampler& sampler, const prior::TaskShape& shape,
                  const TrainingConfig& cfg, const std::string& metrics_path = {});

}  // namespace ficbo::train
