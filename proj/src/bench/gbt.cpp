#include "ficbo/bench/gbt.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace ficbo::bench {

void RegressionTree::fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, int max_depth, int min_samples_leaf) {
  nodes_.clear();
  std::vector<Eigen::Index> rows(static_cast<std::size_t>(x.rows()));
  std::iota(rows.begin(), rows.end(), Eigen::Index{0});
  build(x, y, rows, 0, max_depth, min_samples_leaf);
}

int RegressionTree::build(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, std::vector<Eigen::Index>& rows,
                          int depth, int max_depth, int min_samples_leaf) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.emplace_back();
  double sum = 0.0;
  for (Eigen::Index r : rows) sum += y[r];
  const auto n = static_cast<double>(rows.size());
  nodes_[static_cast<std::size_t>(id)].value = sum / n;
  if (depth >= max_depth || rows.size() < 2 * static_cast<std::size_t>(min_samples_leaf)) return id;

  // Minimizing the children's SSE is maximizing sum_l^2/n_l + sum_r^2/n_r.
  double best_gain = sum * sum / n + 1e-12 * std::max(1.0, std::abs(sum * sum / n));
  int best_feature = -1;
  double best_threshold = 0.0;
  std::vector<Eigen::Index> order = rows;
  for (Eigen::Index f = 0; f < x.cols(); ++f) {
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return x(a, f) < x(b, f); });
    double left = 0.0;
    for (std::size_t i = 0; i + 1 < order.size(); ++i) {
      left += y[order[i]];
      const double xa = x(order[i], f), xb = x(order[i + 1], f);
      if (xa == xb) continue;
      const auto nl = static_cast<double>(i + 1);
      const double nr = n - nl;
      if (nl < min_samples_leaf || nr < min_samples_leaf) continue;
      const double right = sum - left;
      const double gain = left * left / nl + right * right / nr;
      if (gain > best_gain) {
        best_gain = gain;
        best_feature = static_cast<int>(f);
        best_threshold = 0.5 * (xa + xb);
      }
    }
  }
  if (best_feature < 0) return id;

  std::vector<Eigen::Index> lrows, rrows;
  for (Eigen::Index r : rows) (x(r, best_feature) <= best_threshold ? lrows : rrows).push_back(r);
  nodes_[static_cast<std::size_t>(id)].feature = best_feature;
  nodes_[static_cast<std::size_t>(id)].threshold = best_threshold;
  const int l = build(x, y, lrows, depth + 1, max_depth, min_samples_leaf);
  const int r = build(x, y, rrows, depth + 1, max_depth, min_samples_leaf);
  nodes_[static_cast<std::size_t>(id)].left = l;
  nodes_[static_cast<std::size_t>(id)].right = r;
  return id;
}

double RegressionTree::predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  if (nodes_.empty()) throw std::logic_error("RegressionTree: not fitted");
  int i = 0;
  while (nodes_[static_cast<std::size_t>(i)].feature >= 0) {
    const Node& nd = nodes_[static_cast<std::size_t>(i)];
    i = x[nd.feature] <= nd.threshold ? nd.left : nd.right;
  }
  return nodes_[static_cast<std::size_t>(i)].value;
}

void GradientBoostedTrees::fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  if (x.rows() < 2 || x.rows() != y.size()) throw std::invalid_argument("GradientBoostedTrees: need at least two points");
  init_ = y.mean();
  trees_.clear();
  Eigen::VectorXd pred = Eigen::VectorXd::Constant(y.size(), init_);
  for (int s = 0; s < cfg_.n_stages; ++s) {
    const Eigen::VectorXd residual = y - pred;
    RegressionTree tree;
    tree.fit(x, residual, cfg_.max_depth, cfg_.min_samples_leaf);
    for (Eigen::Index i = 0; i < x.rows(); ++i) pred[i] += cfg_.learning_rate * tree.predict(x.row(i));
    trees_.push_back(std::move(tree));
  }
}

double GradientBoostedTrees::predict_row(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  double v = init_;
  for (const auto& t : trees_) v += cfg_.learning_rate * t.predict(x);
  return v;
}

Eigen::VectorXd GradientBoostedTrees::predict(const Eigen::MatrixXd& x) const {
  Eigen::VectorXd out(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) out[i] = predict_row(x.row(i));
  return out;
}

}  // namespace ficbo::bench
