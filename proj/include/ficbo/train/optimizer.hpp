#pragma once

#include <cstddef>
#include <vector>

#include "ficbo/model/autodiff.hpp"

namespace ficbo::train {

struct AdamWConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 1e-7;
};

// Adam moments with weight decay applied directly to the weights.
class AdamW {
 public:
  AdamW(const std::vector<nn::Parameter>& params, AdamWConfig cfg = {});

  void step(std::vector<nn::Parameter>& params, double lr);
  [[nodiscard]] long steps() const { return t_; }

 private:
  AdamWConfig cfg_;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
  long t_ = 0;
};

// Cosine annealing with warm restarts: period T0, multiplied by t_mult after
// every restart.
double cosine_restart_lr(double base_lr, long iteration, long t0, long t_mult, double eta_min = 0.0);

double global_grad_norm(const std::vector<nn::Parameter>& params);

// Rescales gradients so their global norm is at most max_norm. Returns the
// norm before clipping.
double clip_grad_norm(std::vector<nn::Parameter>& params, double max_norm);

}  // namespace ficbo::train
