#pragma once

// Benchmark tasks packaged as TaskInstances. Pools are drawn uniformly in the
// normalized space [-5, 5]^d, which is what the optimizer sees; objectives are
// evaluated after mapping to each function's natural domain.

#include <Eigen/Dense>
#include <string>
#include <string_view>
#include <vector>

#include "ficbo/bench/functions.hpp"
#include "ficbo/prior/task.hpp"
#include "ficbo/util/rng.hpp"

namespace ficbo::bench {

enum class FeedbackKind { MarginalExpert, TreeExpert, LowFidelity, ConversionProxy };

std::string_view to_string(FeedbackKind k);
FeedbackKind feedback_kind_from_string(std::string_view s);

inline constexpr double kDesignScale = 5.0;

struct BenchmarkSpec {
  std::string name;  // analytic function name, "branin_mf" or "reactor"
  int d = 1;
  FeedbackKind feedback = FeedbackKind::MarginalExpert;
  std::vector<int> expert_dims;  // defaults to the last dimension
  double noise = 0.01;
  double branin_a = 0.0;
  int n_marginal = 2000;
  int n_expert_points = 50;
  // Affine map taking the pool's noiseless objective to zero mean and unit
  // std, applied to both y and u.
  bool standardize = true;
  ReactorParams reactor;

  [[nodiscard]] std::string label() const;
  void validate() const;
};

// Registry lookup: analytic functions take `feedback` marginal|tree, branin_mf
// is low-fidelity feedback with discrepancy a, reactor uses conversion.
BenchmarkSpec make_benchmark(std::string_view name, int d, std::string_view feedback = "marginal", double branin_a = 0.0);

const std::vector<std::string>& benchmark_names();

// Objective at a normalized point (maximization form, no noise).
double benchmark_objective(const BenchmarkSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& z);

// Average of f over the rows of `hidden_draws` (normalized coordinates for the
// non-expert dimensions), with the expert coordinates fixed.
double marginal_expert_feedback(std::string_view name, const Eigen::Ref<const Eigen::VectorXd>& z,
                                const std::vector<int>& expert_dims, const Eigen::MatrixXd& hidden_draws);

// Draws L hidden points from rng; with every dimension visible returns f.
double marginal_expert_feedback(std::string_view name, const Eigen::Ref<const Eigen::VectorXd>& z,
                                const std::vector<int>& expert_dims, int n_draws, Rng& rng);

prior::TaskInstance build_benchmark_pool(Rng& rng, const BenchmarkSpec& spec, int pool_size = 300, int n_context = 1,
                                         int horizon = 30);

}  // namespace ficbo::bench
