#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <nlohmann/json.hpp>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ficbo/bias/bias.hpp"

namespace ficbo::prior {

enum class PriorKind { Additive, Mixture, Benchmark };
enum class SourceMode { Direct, ModelBased };
enum class TargetSignal { Hidden, Total };

std::string_view to_string(PriorKind k);
std::string_view to_string(SourceMode m);
std::string_view to_string(TargetSignal s);
PriorKind prior_kind_from_string(std::string_view s);
SourceMode source_mode_from_string(std::string_view s);
TargetSignal target_signal_from_string(std::string_view s);

// x_full = (x_main, x_shared, x_src). The optimizer sees the first d_model
// coordinates (x_main, x_shared); the source sees the last overlap + d_src.
struct VisibilitySplit {
  int d_model = 1;
  int d_src = 0;
  int overlap = 0;

  [[nodiscard]] int d_full() const { return d_model + d_src; }
  [[nodiscard]] int d_main() const { return d_model - overlap; }
  [[nodiscard]] int d_source_visible() const { return overlap + d_src; }

  void validate() const;
  [[nodiscard]] Eigen::MatrixXd model_view(const Eigen::MatrixXd& full) const;
  [[nodiscard]] Eigen::MatrixXd source_view(const Eigen::MatrixXd& full) const;
  [[nodiscard]] Eigen::MatrixXd main_view(const Eigen::MatrixXd& full) const;
};

struct TaskMetadata {
  PriorKind prior = PriorKind::Additive;
  std::string name;
  VisibilitySplit split;
  double w = 0.0;                          // additive: source relevance
  SourceMode source_mode = SourceMode::Direct;
  TargetSignal target_signal = TargetSignal::Hidden;
  int n_source_points = 0;
  int k_real = 0;                          // mixture
  int k_decoy = 0;
  std::vector<double> source_weights;      // mixture: a_k, zero outside the active set
  std::vector<int> active_components;      // mixture: S (0-based)
  bias::BiasRecord bias;
};

// Quantities the generator knows but the optimizer must never see.
struct LatentData {
  Eigen::MatrixXd pool_full;
  Eigen::MatrixXd target_full;
  Eigen::VectorXd pool_clean;       // noiseless objective on the pool
  Eigen::VectorXd pool_f_model;     // additive components on the pool
  Eigen::VectorXd pool_f_src;
  Eigen::VectorXd pool_ideal;       // source signal before degradation
  Eigen::MatrixXd source_inputs;    // source-private data (source-visible coordinates)
  Eigen::VectorXd source_values;
};

// The part of a task an optimizer may read: candidate inputs, pool-wide
// feedback, the initial context indices and the horizon. Objective values are
// revealed only through the episode.
struct OptimizerView {
  const Eigen::MatrixXd& pool_x;
  const Eigen::VectorXd& pool_u;
  std::span<const std::size_t> context_init;
  int horizon;
};

// One sampled optimization episode. Pool rows include the initial context;
// context rows are observed up front and are never selectable.
struct TaskInstance {
  Eigen::MatrixXd pool_x;                 // N x d_model
  Eigen::VectorXd pool_y;                 // noisy objective, sampled once
  Eigen::VectorXd pool_u;                 // feedback
  std::vector<std::size_t> context_init;
  Eigen::MatrixXd target_x;               // held-out prediction targets
  Eigen::VectorXd target_y;
  Eigen::VectorXd target_u;
  int horizon = 0;
  TaskMetadata meta;
  LatentData latent;

  [[nodiscard]] std::size_t pool_rows() const { return static_cast<std::size_t>(pool_x.rows()); }
  [[nodiscard]] std::size_t candidate_count() const { return pool_rows() - context_init.size(); }
  [[nodiscard]] int d_model() const { return static_cast<int>(pool_x.cols()); }
  [[nodiscard]] OptimizerView view() const { return {pool_x, pool_u, context_init, horizon}; }

  // Throws std::invalid_argument on inconsistent shapes.
  void validate() const;
};

// Arrays are row-major nested lists, enums are strings. Latent data is
// written only when include_latent is set.
nlohmann::json task_to_json(const TaskInstance& task, bool include_latent = false);
TaskInstance task_from_json(const nlohmann::json& j);

}  // namespace ficbo::prior
