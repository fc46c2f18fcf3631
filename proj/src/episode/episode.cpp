#include "ficbo/episode/episode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace ficbo::episode {

EpisodeState EpisodeState::initial(const prior::TaskInstance& task) {
  EpisodeState s;
  s.pool_mask.assign(task.pool_rows(), true);
  s.horizon = task.horizon;
  s.best_so_far = -std::numeric_limits<double>::infinity();
  for (std::size_t c : task.context_init) {
    const auto i = static_cast<Eigen::Index>(c);
    s.history.push_back({c, task.pool_u[i], task.pool_y[i]});
    s.pool_mask[c] = false;
    s.best_so_far = std::max(s.best_so_far, task.pool_y[i]);
  }
  return s;
}

std::size_t EpisodeState::remaining() const {
  return static_cast<std::size_t>(std::count(pool_mask.begin(), pool_mask.end(), true));
}

std::vector<std::size_t> EpisodeState::remaining_indices() const {
  std::vector<std::size_t> out;
  out.reserve(pool_mask.size());
  for (std::size_t i = 0; i < pool_mask.size(); ++i)
    if (pool_mask[i]) out.push_back(i);
  return out;
}

double step(EpisodeState& state, const prior::TaskInstance& task, std::size_t index) {
  if (state.done()) throw std::logic_error("step: episode already reached its horizon");
  if (index >= state.pool_mask.size() || !state.pool_mask[index])
    throw std::invalid_argument("step: index " + std::to_string(index) + " is not selectable");
  const auto i = static_cast<Eigen::Index>(index);
  const double y = task.pool_y[i];
  const double reward = std::max(y - state.best_so_far, 0.0);
  state.history.push_back({index, task.pool_u[i], y});
  state.pool_mask[index] = false;
  state.best_so_far = std::max(state.best_so_far, y);
  ++state.step;
  return reward;
}

std::vector<double> discounted_returns(std::span<const double> rewards, double gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("discounted_returns: gamma out of [0,1]");
  std::vector<double> out(rewards.size());
  double acc = 0.0;
  for (std::size_t k = rewards.size(); k-- > 0;) {
    acc = rewards[k] + gamma * acc;
    out[k] = acc;
  }
  return out;
}

Eigen::MatrixXd normalize_returns_per_step(const Eigen::MatrixXd& returns, double eps) {
  if (returns.rows() < 1) throw std::invalid_argument("normalize_returns_per_step: empty batch");
  Eigen::MatrixXd out(returns.rows(), returns.cols());
  const double n = static_cast<double>(returns.rows());
  for (Eigen::Index t = 0; t < returns.cols(); ++t) {
    const double mean = returns.col(t).sum() / n;
    const double var = (returns.col(t).array() - mean).square().sum() / n;
    out.col(t) = ((returns.col(t).array() - mean) / (std::sqrt(var) + eps)).matrix();
  }
  return out;
}

Trajectory run_episode(const prior::TaskInstance& task, const Policy& policy, Rng& rng) {
  EpisodeState state = EpisodeState::initial(task);
  Trajectory tr;
  while (!state.done()) {
    const std::size_t idx = policy(state, rng);
    const double r = step(state, task, idx);
    tr.selections.push_back(idx);
    tr.ys.push_back(state.history.back().y);
    tr.us.push_back(state.history.back().u);
    tr.rewards.push_back(r);
    tr.best_found.push_back(state.best_so_far);
  }
  return tr;
}

}  // namespace ficbo::episode
