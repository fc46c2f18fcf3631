#pragma once

// Pool-based BO as an MDP: the history grows by one observation per step and
// the selected candidate leaves the pool.

#include <Eigen/Dense>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "ficbo/prior/task.hpp"
#include "ficbo/util/rng.hpp"

namespace ficbo::episode {

struct Observation {
  std::size_t index;  // pool row; x is task.pool_x.row(index)
  double u;
  double y;
};

struct EpisodeState {
  std::vector<Observation> history;  // context first, then selections
  std::vector<bool> pool_mask;       // true while selectable
  int step = 0;
  int horizon = 0;
  double best_so_far = 0.0;

  static EpisodeState initial(const prior::TaskInstance& task);

  [[nodiscard]] std::size_t remaining() const;
  [[nodiscard]] std::vector<std::size_t> remaining_indices() const;
  [[nodiscard]] bool done() const { return step >= horizon; }
};

// Appends the observation, masks the index and returns the improvement
// reward max(y - best, 0). Throws on a masked index or a finished episode.
double step(EpisodeState& state, const prior::TaskInstance& task, std::size_t index);

std::vector<double> discounted_returns(std::span<const double> rewards, double gamma);

// (R - mean_t) / (std_t + eps) per column, population std over rows.
Eigen::MatrixXd normalize_returns_per_step(const Eigen::MatrixXd& returns, double eps = 1e-8);

struct Trajectory {
  std::vector<std::size_t> selections;
  std::vector<double> ys;
  std::vector<double> us;
  std::vector<double> rewards;
  std::vector<double> best_found;  // after each step
};

using Policy = std::function<std::size_t(const EpisodeState&, Rng&)>;

Trajectory run_episode(const prior::TaskInstance& task, const Policy& policy, Rng& rng);

}  // namespace ficbo::episode
