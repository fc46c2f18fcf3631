#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "ficbo/episode/episode.hpp"
#include "ficbo/harness/metrics.hpp"
#include "test_util.hpp"

using namespace ficbo;
using namespace ficbo::episode;
using ficbo::testing::make_task;
using ficbo::testing::vec;

TEST(Step, RewardsAndPoolCount) {
  const auto task = make_task(vec({1.0, 2.0, 0.5, 0.2}), vec({0, 0, 0, 0}), 3);
  EpisodeState s = EpisodeState::initial(task);
  EXPECT_EQ(s.best_so_far, 1.0);
  EXPECT_EQ(s.remaining(), 3u);
  EXPECT_DOUBLE_EQ(step(s, task, 1), 1.0);
  EXPECT_EQ(s.remaining(), 2u);
  EXPECT_DOUBLE_EQ(step(s, task, 2), 0.0);
  EXPECT_EQ(s.best_so_far, 2.0);
  EXPECT_THROW(step(s, task, 1), std::invalid_argument);
  step(s, task, 3);
  EXPECT_TRUE(s.done());
  EXPECT_THROW(step(s, task, 0), std::logic_error);
}

TEST(Step, PastHorizonThrows) {
  const auto task = make_task(vec({0.0, 1.0, 2.0}), vec({0, 0, 0}), 1);
  EpisodeState s = EpisodeState::initial(task);
  step(s, task, 1);
  EXPECT_THROW(step(s, task, 2), std::logic_error);
}

TEST(Returns, HandComputed) {
  const std::vector<double> r{1.0, 0.0, 1.0};
  const auto R = discounted_returns(r, 0.98);
  EXPECT_NEAR(R[0], 1.9604, 1e-12);
  EXPECT_NEAR(R[1], 0.98, 1e-12);
  EXPECT_NEAR(R[2], 1.0, 1e-12);
  const auto r0 = discounted_returns(r, 0.0);
  EXPECT_EQ(r0, r);
  const std::vector<double> z(4, 0.0);
  EXPECT_EQ(discounted_returns(z, 0.9), z);
}

TEST(Returns, Recurrence) {
  Rng rng(3);
  std::vector<double> r(12);
  for (auto& v : r) v = rng.uniform();
  const auto R = discounted_returns(r, 0.9);
  for (std::size_t t = 0; t + 1 < r.size(); ++t) EXPECT_NEAR(R[t], r[t] + 0.9 * R[t + 1], 1e-12);
}

TEST(Normalize, Conventions) {
  Eigen::MatrixXd ret(2, 2);
  ret << 0.0, 5.0, 2.0, 5.0;
  const Eigen::MatrixXd n = normalize_returns_per_step(ret);
  EXPECT_NEAR(n(0, 0), -1.0, 1e-7);
  EXPECT_NEAR(n(1, 0), 1.0, 1e-7);
  EXPECT_EQ(n(0, 1), 0.0);
  EXPECT_EQ(n(1, 1), 0.0);
  Eigen::MatrixXd r3 = Eigen::MatrixXd::Random(5, 3);
  const Eigen::MatrixXd n3 = normalize_returns_per_step(r3);
  for (int c = 0; c < 3; ++c) EXPECT_LT(std::abs(n3.col(c).mean()), 1e-6);
}

TEST(RunEpisode, RandomExhaustsPool) {
  Eigen::VectorXd y = Eigen::VectorXd::LinSpaced(11, 0, 1);
  const auto task = make_task(y, y, 10);
  Rng rng(4);
  const auto tr = run_episode(task, [](const EpisodeState& s, Rng& r) {
    const auto idx = s.remaining_indices();
    return idx[r.index(idx.size())];
  }, rng);
  std::set<std::size_t> uniq(tr.selections.begin(), tr.selections.end());
  EXPECT_EQ(uniq.size(), 10u);
  EXPECT_EQ(uniq.count(0), 0u);
}

TEST(RunEpisode, GreedyFeedbackOrderAndTelescoping) {
  const auto task = make_task(vec({0.0, 0.3, -1.0, 2.0, 0.7}), vec({9, 0.1, 0.5, 0.2, 0.9}), 4);
  Rng rng(5);
  const auto tr = run_episode(task, [&](const EpisodeState& s, Rng&) {
    std::size_t best = 0;
    double bu = -1e300;
    for (std::size_t i : s.remaining_indices())
      if (task.pool_u[i] > bu) bu = task.pool_u[i], best = i;
    return best;
  }, rng);
  EXPECT_EQ(tr.selections, (std::vector<std::size_t>{4, 2, 3, 1}));
  double sum = 0.0;
  for (double r : tr.rewards) {
    EXPECT_GE(r, 0.0);
    sum += r;
  }
  EXPECT_DOUBLE_EQ(sum, tr.best_found.back() - 0.0);
  EXPECT_TRUE(std::is_sorted(tr.best_found.begin(), tr.best_found.end()));
}

TEST(RunEpisode, OracleRegretIsMinimal) {
  // Brute force over all ordered selections on a 5-candidate pool, horizon 3.
  const auto task = make_task(vec({0.1, 0.4, -0.3, 1.2, 0.8, 0.05}), vec({0, 0, 0, 0, 0, 0}), 3);
  const auto ref = harness::regret_reference(task);
  Rng rng(6);
  const auto oracle = run_episode(task, [&](const EpisodeState& s, Rng&) {
    std::size_t best = 0;
    double by = -1e300;
    for (std::size_t i : s.remaining_indices())
      if (task.pool_y[i] > by) by = task.pool_y[i], best = i;
    return best;
  }, rng);
  const double oracle_regret = harness::cumulative_regret(oracle.ys, ref.pool_max, ref.normalizer).back();
  double best = 1e300;
  for (std::size_t a = 1; a < 6; ++a)
    for (std::size_t b = 1; b < 6; ++b)
      for (std::size_t c = 1; c < 6; ++c) {
        if (a == b || b == c || a == c) continue;
        const std::vector<double> ys{task.pool_y[a], task.pool_y[b], task.pool_y[c]};
        best = std::min(best, harness::cumulative_regret(ys, ref.pool_max, ref.normalizer).back());
      }
  EXPECT_NEAR(oracle_regret, best, 1e-12);
}
