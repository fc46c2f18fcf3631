#pragma once

#include <Eigen/Dense>
#include <numeric>

#include "ficbo/prior/task.hpp"

namespace ficbo::testing {

// Hand-built 1-D task; the first n_context rows are the context.
inline prior::TaskInstance make_task(const Eigen::VectorXd& y, const Eigen::VectorXd& u, int horizon,
                                     int n_context = 1) {
  prior::TaskInstance t;
  const Eigen::Index n = y.size();
  t.pool_x = Eigen::VectorXd::LinSpaced(n, -4.0, 4.0);
  t.pool_y = y;
  t.pool_u = u;
  t.context_init.resize(static_cast<std::size_t>(n_context));
  std::iota(t.context_init.begin(), t.context_init.end(), std::size_t{0});
  t.target_x = Eigen::MatrixXd(0, 1);
  t.target_y = Eigen::VectorXd(0);
  t.target_u = Eigen::VectorXd(0);
  t.horizon = horizon;
  t.meta.prior = prior::PriorKind::Benchmark;
  t.meta.name = "hand";
  t.meta.split = {1, 0, 1};
  t.latent.pool_clean = y;
  t.validate();
  return t;
}

inline Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

}  // namespace ficbo::testing
