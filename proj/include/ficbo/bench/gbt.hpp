#pragma once

// Gradient-boosted regression trees with squared-error loss and exact greedy
// splits. Small and deliberately low-capacity.

#include <Eigen/Dense>
#include <vector>

namespace ficbo::bench {

struct GbtConfig {
  int n_stages = 10;
  int max_depth = 3;
  double learning_rate = 0.15;
  int min_samples_leaf = 1;
};

class RegressionTree {
 public:
  void fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, int max_depth, int min_samples_leaf);
  [[nodiscard]] double predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;

 private:
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    double value = 0.0;
    int left = -1;
    int right = -1;
  };
  int build(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, std::vector<Eigen::Index>& rows, int depth,
            int max_depth, int min_samples_leaf);
  std::vector<Node> nodes_;
};

class GradientBoostedTrees {
 public:
  explicit GradientBoostedTrees(GbtConfig cfg = {}) : cfg_(cfg) {}

  // Throws with fewer than two training points.
  void fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);
  [[nodiscard]] double predict_row(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
  [[nodiscard]] Eigen::VectorXd predict(const Eigen::MatrixXd& x) const;

 private:
  GbtConfig cfg_;
  double init_ = 0.0;
  std::vector<RegressionTree> trees_;
};

}  // namespace ficbo::bench
