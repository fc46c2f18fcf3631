#include "ficbo/gp/gp.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

namespace ficbo::gp {

JitteredFactor jittered_cholesky(const Eigen::MatrixXd& k, double scale) {
  const double start = 1e-6 * scale;
  const double cap = 1e-2 * scale * (1.0 + 1e-9);
  const Eigen::Index n = k.rows();
  for (double jitter = start; jitter <= cap; jitter *= 10.0) {
    Eigen::MatrixXd a = k;
    a.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() == Eigen::Success) {
      JitteredFactor f;
      f.lower = llt.matrixL();
      f.jitter = jitter;
      if (f.lower.allFinite()) return f;
    }
  }
  throw CholeskyError("Cholesky failed after jitter escalation on a " + std::to_string(n) + "x" + std::to_string(n) +
                      " kernel matrix");
}

Eigen::VectorXd sample_gp_joint(Rng& rng, const KernelSpec& spec, const Eigen::MatrixXd& points) {
  if (points.rows() < 1) throw std::invalid_argument("sample_gp_joint: need at least one point");
  if (points.cols() != spec.dim()) throw std::invalid_argument("sample_gp_joint: dimension mismatch");
  const Eigen::Index m = points.rows();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    for (Eigen::Index c = 0; c < points.cols(); ++c) {
      if (points(a, c) != points(b, c)) return points(a, c) < points(b, c);
    }
    return false;
  });
  Eigen::MatrixXd sorted(m, points.cols());
  for (Eigen::Index i = 0; i < m; ++i) sorted.row(i) = points.row(order[static_cast<std::size_t>(i)]);

  const JitteredFactor f = jittered_cholesky(kernel_matrix(spec, sorted), spec.output_scale);
  Eigen::VectorXd z(m);
  for (Eigen::Index i = 0; i < m; ++i) z[i] = rng.normal();
  const Eigen::VectorXd draw_sorted = f.lower * z;
  Eigen::VectorXd out(m);
  for (Eigen::Index i = 0; i < m; ++i) out[order[static_cast<std::size_t>(i)]] = draw_sorted[i];
  return out;
}

GpRegressor::GpRegressor(Eigen::MatrixXd train_inputs, Eigen::VectorXd train_targets, double noise_variance,
                         KernelSpec kernel)
    : inputs_(std::move(train_inputs)),
      targets_(std::move(train_targets)),
      noise_variance_(noise_variance),
      kernel_(std::move(kernel)) {
  kernel_.validate();
  if (inputs_.rows() < 1) throw std::invalid_argument("GpRegressor: need at least one training point");
  if (inputs_.rows() != targets_.size()) throw std::invalid_argument("GpRegressor: inputs/targets size mismatch");
  if (inputs_.cols() != kernel_.dim()) throw std::invalid_argument("GpRegressor: dimension mismatch");
  if (noise_variance_ < 0.0) throw std::invalid_argument("GpRegressor: negative noise variance");
  Eigen::MatrixXd k = kernel_matrix(kernel_, inputs_);
  k.diagonal().array() += noise_variance_;
  factor_ = jittered_cholesky(k, kernel_.output_scale);
  alpha_ = factor_.lower.transpose().triangularView<Eigen::Upper>().solve(
      factor_.lower.triangularView<Eigen::Lower>().solve(targets_));
}

Eigen::MatrixXd GpRegressor::regularized_matrix() const {
  Eigen::MatrixXd k = kernel_matrix(kernel_, inputs_);
  k.diagonal().array() += noise_variance_ + factor_.jitter;
  return k;
}

GpRegressor::Posterior GpRegressor::posterior(const Eigen::MatrixXd& query) const {
  if (query.cols() != kernel_.dim()) throw std::invalid_argument("gp_posterior: dimension mismatch");
  const Eigen::MatrixXd kq = kernel_matrix(kernel_, inputs_, query);  // n x q
  Posterior p;
  p.mean = kq.transpose() * alpha_;
  const Eigen::MatrixXd v = factor_.lower.triangularView<Eigen::Lower>().solve(kq);
  p.variance = (kernel_.output_scale - v.colwise().squaredNorm().transpose().array()).max(0.0).matrix();
  return p;
}

Eigen::VectorXd GpRegressor::predict_mean(const Eigen::MatrixXd& query) const {
  if (query.cols() != kernel_.dim()) throw std::invalid_argument("gp_posterior: dimension mismatch");
  return kernel_matrix(kernel_, inputs_, query).transpose() * alpha_;
}

}  // namespace ficbo::gp
