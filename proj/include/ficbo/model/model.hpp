#pragma once

// Feedback-aware in-context optimizer: token embedders, a masked pre-norm
// transformer encoder, a categorical policy head over the remaining pool and a
// Gaussian-mixture predictive head.

#include <Eigen/Dense>
#include <cstdint>
#include <nlohmann/json.hpp>
#include <string_view>
#include <vector>

#include "ficbo/episode/episode.hpp"
#include "ficbo/model/autodiff.hpp"
#include "ficbo/prior/task.hpp"

namespace ficbo::model {

enum class FeedbackMode { Concat, Add, Disabled, AsFeature };

std::string_view to_string(FeedbackMode m);
FeedbackMode feedback_mode_from_string(std::string_view s);

struct ModelConfig {
  int d_x = 1;
  int d_embed = 32;
  int n_layers = 3;
  int n_heads = 4;
  int d_ff = 128;
  int n_mixture = 10;
  double dropout = 0.0;
  FeedbackMode feedback_mode = FeedbackMode::Concat;
  bool query_attends_queries = true;
  bool use_time_token = false;
  double std_floor = 1e-4;

  void validate() const;
};

void to_json(nlohmann::json& j, const ModelConfig& c);
void from_json(const nlohmann::json& j, ModelConfig& c);

struct GmmPosterior {
  std::vector<double> weights;
  std::vector<double> means;
  std::vector<double> stds;

  [[nodiscard]] double mean() const;
  [[nodiscard]] double variance() const;
};

double gmm_log_density(const GmmPosterior& post, double y);

// Decodes one [logit_w | mean | raw_std] row.
GmmPosterior decode_gmm(const double* row, std::size_t k, double std_floor);

struct PolicyDistribution {
  std::vector<std::size_t> indices;  // remaining pool rows, ascending
  std::vector<double> logits;
  std::vector<double> probs;
  std::vector<double> log_probs;
};

// Token rows in order: context, queries, targets.
struct TokenInputs {
  Eigen::MatrixXd x;
  Eigen::VectorXd u;
  Eigen::VectorXd y_context;
  std::size_t n_context = 0;
  std::size_t n_query = 0;
  std::size_t n_target = 0;
  std::vector<std::size_t> query_index;
};

// Context from the history, queries from the remaining pool, and optionally
// the task's held-out targets.
TokenInputs make_inputs(const prior::TaskInstance& task, const episode::EpisodeState& state, bool include_targets);
TokenInputs make_inputs(const prior::OptimizerView& view, const episode::EpisodeState& state);

struct ForwardResult {
  nn::Var log_probs = -1;  // n_query x 1
  nn::Var gmm = -1;        // (n_query + n_target) x 3K
};

class Model {
 public:
  explicit Model(ModelConfig cfg, std::uint64_t seed = 0);

  [[nodiscard]] const ModelConfig& config() const { return cfg_; }
  std::vector<nn::Parameter>& parameters() { return params_; }
  [[nodiscard]] const std::vector<nn::Parameter>& parameters() const { return params_; }
  [[nodiscard]] std::size_t parameter_count() const;
  void zero_grad();

  nn::Var embed(nn::Graph& g, const TokenInputs& in);
  nn::Var backbone(nn::Graph& g, nn::Var tokens, const TokenInputs& in);
  // time_frac is t / T, used only with the time token.
  ForwardResult forward(nn::Graph& g, const TokenInputs& in, double time_frac, bool want_policy = true,
                        bool want_gmm = true);

  PolicyDistribution policy(const prior::OptimizerView& view, const episode::EpisodeState& state);
  // Predictive mixtures for every remaining pool row, in ascending index order.
  std::vector<GmmPosterior> predict(const prior::OptimizerView& view, const episode::EpisodeState& state);

 private:
  struct Dense {
    std::size_t w;
    std::size_t b;
  };
  struct Mlp {
    Dense first;
    Dense second;
  };
  struct Layer {
    std::size_t ln1_g, ln1_b;
    Dense qkv;
    Dense out;
    std::size_t ln2_g, ln2_b;
    Dense ff1;
    Dense ff2;
  };

  Dense add_dense(const std::string& name, std::size_t in, std::size_t out);
  std::size_t add_vector(const std::string& name, std::size_t n, double fill);
  Mlp add_mlp(const std::string& name, std::size_t in, std::size_t hidden, std::size_t out);
  nn::Var apply(nn::Graph& g, const Dense& d, nn::Var x);
  nn::Var apply(nn::Graph& g, const Mlp& m, nn::Var x);

  ModelConfig cfg_;
  std::vector<nn::Parameter> params_;
  Mlp e_x_{};
  Mlp e_u_{};
  Mlp e_y_{};
  std::vector<Layer> layers_;
  Mlp policy_{};
  Dense gmm_{};
  bool has_e_u_ = false;
};

}  // namespace ficbo::model
