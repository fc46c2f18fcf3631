#pragma once

// Three-armed bandit run through the real rollout / train_step path: one
// context point with y = 0, three candidates worth 2, 1 and 0, horizon 1, raw
// returns. The policy must learn to pick the first candidate.

#include "ficbo/train/training.hpp"
#include "gradcheck.hpp"
#include "test_util.hpp"

namespace ficbo::testing {

struct BanditResult {
  double p_best = 0.0;
  int updates = 0;
};

inline prior::TaskInstance bandit_task() {
  return make_task(vec({0.0, 2.0, 1.0, 0.0}), vec({0.0, 0.0, 0.0, 0.0}), 1);
}

inline double bandit_p_best(model::Model& m, const prior::TaskInstance& task) {
  const auto state = episode::EpisodeState::initial(task);
  return m.policy(task.view(), state).probs[0];
}

// Stops early once the probability clears `target` (checked every 50 updates).
inline BanditResult run_bandit(int max_updates, double target = 0.9, std::uint64_t seed = 0) {
  model::Model m(toy_config(), seed);
  train::TrainingConfig cfg;
  cfg.batch_size = 1;
  cfg.normalize_returns = false;
  cfg.lambda_pol = 1.0;
  train::AdamW opt(m.parameters());
  const std::vector<prior::TaskInstance> batch{bandit_task()};
  Rng rng(seed + 1);
  BanditResult r;
  for (int i = 1; i <= max_updates; ++i) {
    train::train_step(m, opt, batch, train::SelectionMode::Policy, cfg, 3e-3, rng);
    r.updates = i;
    if (i % 50 == 0) {
      r.p_best = bandit_p_best(m, batch[0]);
      if (r.p_best > target) return r;
    }
  }
  r.p_best = bandit_p_best(m, batch[0]);
  return r;
}

}  // namespace ficbo::testing
