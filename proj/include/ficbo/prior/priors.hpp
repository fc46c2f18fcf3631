#pragma once

// Synthetic task generators: the feature-split additive prior and the
// reweighted latent-component (mixture) prior, plus source-private data.

#include <Eigen/Dense>
#include <nlohmann/json.hpp>
#include <vector>

#include "ficbo/bias/bias.hpp"
#include "ficbo/gp/gp.hpp"
#include "ficbo/prior/task.hpp"
#include "ficbo/util/rng.hpp"

namespace ficbo::prior {

inline constexpr double kDomainHalfWidth = 5.0;

struct IntRange {
  int lo = 0;
  int hi = 0;
};

struct AdditivePriorConfig {
  double w_min = 0.3;
  double w_max = 0.9;
  std::vector<int> d_src_choices{1, 2};
  std::vector<int> overlap_choices{0, 1};
  // Source-private dataset sizes; empty means the dimension-dependent default
  // ({10, 100} in 1-D, {30, 300} otherwise).
  std::vector<int> n_src_choices;
  double uniform_fraction = 0.25;
  bias::Range cluster_std{0.5, 1.5};
  IntRange n_centers{1, 5};
  SourceMode source_mode = SourceMode::ModelBased;
  TargetSignal target_signal = TargetSignal::Hidden;
  double source_model_noise = 1e-4;

  void validate() const;
};

struct MixturePriorConfig {
  int k_real = 3;
  IntRange k_decoy{2, 8};
  double alpha_src = 0.7;
  double p_src = 0.8;

  void validate() const;
};

// Shared episode shape. pool_size counts selectable candidates; the
// n_context initial observations are extra rows in the pool arrays.
struct TaskShape {
  int d_model = 1;
  int pool_size = 200;
  IntRange horizon{10, 20};
  int n_context = 1;
  int n_targets = 100;
  double noise_std = 0.01;

  void validate() const;
};

struct PriorSettings {
  AdditivePriorConfig additive;
  MixturePriorConfig mixture;
  bias::BiasConfig bias;
  TaskShape shape;
};

// ceil(uniform_fraction * n) points uniform in [-5, 5]^d, the rest around
// n_centers uniformly placed centres with isotropic std cluster_std, clipped.
Eigen::MatrixXd sample_source_points(Rng& rng, int n, double uniform_fraction, double cluster_std, int n_centers, int d);

// Fits the fixed source model on source-private data.
gp::GpRegressor build_source_model(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& values,
                                   const gp::KernelSpec& kernel, double noise);

// m_1 = 1, m_k ~ Bernoulli(p_src); Dirichlet(alpha) on the active set scaled by
// sqrt(|S|). Returns a_k for k in [0, k_total); `active` receives S.
std::vector<double> masked_dirichlet_weights(Rng& rng, int k_total, double p_src, double alpha_src,
                                             std::vector<int>* active = nullptr);

// (1 - w) f_model + w f_src normalized by sqrt((1 - w)^2 + w^2).
Eigen::VectorXd combine_additive(const Eigen::VectorXd& f_model, const Eigen::VectorXd& f_src, double w);

TaskInstance sample_additive_task(Rng& rng, const AdditivePriorConfig& cfg, const bias::BiasConfig& bias,
                                  const TaskShape& shape);

TaskInstance sample_mixture_task(Rng& rng, const MixturePriorConfig& cfg, const bias::BiasConfig& bias,
                                 const TaskShape& shape);

TaskInstance sample_task(Rng& rng, PriorKind kind, const PriorSettings& settings);

void to_json(nlohmann::json& j, const IntRange& r);
void from_json(const nlohmann::json& j, IntRange& r);
void to_json(nlohmann::json& j, const AdditivePriorConfig& c);
void from_json(const nlohmann::json& j, AdditivePriorConfig& c);
void to_json(nlohmann::json& j, const MixturePriorConfig& c);
void from_json(const nlohmann::json& j, MixturePriorConfig& c);
void to_json(nlohmann::json& j, const TaskShape& c);
void from_json(const nlohmann::json& j, TaskShape& c);
void to_json(nlohmann::json& j, const PriorSettings& c);
void from_json(const nlohmann::json& j, PriorSettings& c);

}  // namespace ficbo::prior
