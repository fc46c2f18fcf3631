#pragma once

#include <Eigen/Dense>
#include <stdexcept>

#include "ficbo/gp/kernel.hpp"
#include "ficbo/util/rng.hpp"

namespace ficbo::gp {

class CholeskyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct JitteredFactor {
  Eigen::MatrixXd lower;  // L with L L^T = K + jitter I
  double jitter = 0.0;
};

// Jitter starts at 1e-6 * scale and grows x10 up to 1e-2 * scale; throws
// CholeskyError once that is exhausted.
JitteredFactor jittered_cholesky(const Eigen::MatrixXd& k, double scale);

// One joint draw from N(0, K(points, points) + jitter I). Points are factorised
// in lexicographic order, so the draw for a given point set does not depend on
// the row order it was passed in.
Eigen::VectorXd sample_gp_joint(Rng& rng, const KernelSpec& spec, const Eigen::MatrixXd& points);

// Exact zero-mean GP regression with a fixed kernel. Immutable after
// construction.
class GpRegressor {
 public:
  GpRegressor(Eigen::MatrixXd train_inputs, Eigen::VectorXd train_targets, double noise_variance, KernelSpec kernel);

  struct Posterior {
    Eigen::VectorXd mean;
    Eigen::VectorXd variance;
  };

  [[nodiscard]] Posterior posterior(const Eigen::MatrixXd& query) const;
  [[nodiscard]] Eigen::VectorXd predict_mean(const Eigen::MatrixXd& query) const;

  [[nodiscard]] const Eigen::MatrixXd& factor() const { return factor_.lower; }
  [[nodiscard]] double jitter() const { return factor_.jitter; }
  [[nodiscard]] double noise_variance() const { return noise_variance_; }
  [[nodiscard]] const KernelSpec& kernel() const { return kernel_; }
  [[nodiscard]] const Eigen::MatrixXd& train_inputs() const { return inputs_; }
  [[nodiscard]] const Eigen::VectorXd& train_targets() const { return targets_; }
  // K + (noise + jitter) I, the matrix the factor reconstructs.
  [[nodiscard]] Eigen::MatrixXd regularized_matrix() const;

 private:
  Eigen::MatrixXd inputs_;
  Eigen::VectorXd targets_;
  double noise_variance_;
  KernelSpec kernel_;
  JitteredFactor factor_;
  Eigen::VectorXd alpha_;
};

}  // namespace ficbo::gp
