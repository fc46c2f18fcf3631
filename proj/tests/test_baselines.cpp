#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "ficbo/baselines/acquisition.hpp"
#include "ficbo/baselines/strategies.hpp"
#include "gradcheck.hpp"
#include "test_util.hpp"

using namespace ficbo;
using namespace ficbo::baselines;
using ficbo::testing::make_task;
using ficbo::testing::vec;

TEST(Acquisition, ClosedForms) {
  EXPECT_DOUBLE_EQ(acq_ucb(1.0, 0.5, 1.0), 1.5);
  EXPECT_NEAR(acq_ei(0.3, 1.0, 0.3), 1.0 / std::sqrt(2.0 * M_PI), 1e-12);
  EXPECT_EQ(acq_ei(0.1, 0.0, 0.3), 0.0);
  EXPECT_DOUBLE_EQ(acq_ei(0.5, 0.0, 0.3), 0.2);
  // z = 1: (mu - y+) Phi(1) + sigma phi(1) with mu - y+ = sigma = 1.
  const double phi1 = std::exp(-0.5) / std::sqrt(2.0 * M_PI), Phi1 = 0.5 * std::erfc(-1.0 / std::sqrt(2.0));
  EXPECT_NEAR(acq_ei(1.0, 1.0, 0.0), Phi1 + phi1, 1e-12);
}

TEST(PiBo, BetaZeroAndLimit) {
  const std::vector<double> s{0.2, 0.5, 0.1}, u{3.0, -1.0, 0.4};
  PiBoSpec spec;
  spec.beta = 0.0;
  EXPECT_EQ(pibo_adjust(s, u, 3, spec), s);
  spec.beta = 2.0;
  const auto late = pibo_adjust(s, u, 1000000000, spec);
  for (std::size_t i = 0; i < s.size(); ++i) EXPECT_NEAR(late[i], s[i], 1e-8);
}

TEST(PiBo, UniformFeedbackIsCommonFactor) {
  const std::vector<double> s{0.2, 0.5, 0.1, 0.45}, u(4, 1.7);
  PiBoSpec spec;
  const auto adj = pibo_adjust(s, u, 2, spec);
  const double f = std::pow(0.25, 2.0 / 3.0);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(adj[i], s[i] * f, 1e-15);
  EXPECT_EQ(argmax_lowest(adj), argmax_lowest(s));
  const auto logs = pibo_log_adjust(s, u, 2, spec);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(logs[i], std::log(adj[i]), 1e-12);
}

TEST(PiBo, LogFormMatchesProduct) {
  const std::vector<double> s{0.0, 0.5, 0.1}, u{0.3, -1.0, 2.0};
  PiBoSpec spec;
  const auto adj = pibo_adjust(s, u, 0, spec);
  const auto lg = pibo_log_adjust(s, u, 0, spec);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(std::exp(lg[i]), adj[i], 1e-15);
  EXPECT_GE(adj[0], 0.0);
}

TEST(Argmax, LowestIndexOnTies) {
  EXPECT_EQ(argmax_lowest(std::vector<double>{1.0, 3.0, 3.0, 2.0}), 1u);
  EXPECT_EQ(argmax_lowest(std::vector<double>{0.0, 0.0}), 0u);
}

TEST(GpAcq, EiNearIncumbentIsTiny) {
  // Smooth objective with its maximum at the context point; every other grid
  // point observed, so each candidate sits between two close observations.
  const int n = 21;
  Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(n, 0.0, 1.0);
  Eigen::VectorXd y = -x;
  auto task = make_task(y, Eigen::VectorXd::Zero(n), 15);
  task.pool_x = x;
  auto state = episode::EpisodeState::initial(task);
  for (int i = 2; i < n; i += 2) episode::step(state, task, static_cast<std::size_t>(i));
  const auto scores = score_gp_acq(task.view(), state, {AcqKind::Ei, 1.0});
  for (double s : scores) EXPECT_LE(s, 1e-3);
}

TEST(GpAcq, SingleObservationUcbMatchesDirectScoring) {
  Eigen::VectorXd y(5);
  y << 0.4, 0, 0, 0, 0;
  auto task = make_task(y, Eigen::VectorXd::Zero(5), 2);
  task.pool_x = vec({0.0, 0.2, 0.9, 3.0, -0.4});
  const auto state = episode::EpisodeState::initial(task);
  // One observation: output scale 1, centred target 0, so mu = 0.4 for all and
  // sigma^2 = 1 - k^2 / (1 + 1e-4 + jitter).
  const auto spec = gp::KernelSpec::isotropic_spec(gp::KernelFamily::Matern52, 1, 0.5, 1.0);
  std::size_t best = 0;
  double best_score = -1e300;
  for (std::size_t i = 1; i < 5; ++i) {
    const double k = gp::kernel_eval(spec, task.pool_x.row(0).transpose(), task.pool_x.row(static_cast<Eigen::Index>(i)).transpose());
    const double sc = 0.4 + std::sqrt(1.0 - k * k / (1.0 + 1e-4));
    if (sc > best_score) best_score = sc, best = i;
  }
  EXPECT_EQ(select_gp_acq(task.view(), state, {AcqKind::Ucb, 1.0}), best);
  EXPECT_EQ(best, 3u);
}

TEST(GpAcq, FallbackScaleWithoutSpread) {
  const auto task = make_task(vec({1.0, 1.0, 0.0, 0.5}), vec({0, 0, 0, 0}), 2, 2);
  const auto state = episode::EpisodeState::initial(task);
  const auto m = fit_history_gp(task.view(), state);
  EXPECT_EQ(m.regressor.kernel().output_scale, 1.0);
  EXPECT_EQ(m.y_mean, 1.0);
}

TEST(Greedy, ExamplesAndRandomFrequencies) {
  const auto task = make_task(vec({0, 0, 0, 0}), vec({9, 3, 1, 2}), 2);
  auto state = episode::EpisodeState::initial(task);
  EXPECT_EQ(select_feedback_greedy(task.view(), state), 1u);
  state.pool_mask[1] = false;
  EXPECT_EQ(select_feedback_greedy(task.view(), state), 3u);

  const auto t5 = make_task(vec({0, 0, 0, 0, 0}), vec({0, 0, 0, 0, 0}), 2);
  const auto s5 = episode::EpisodeState::initial(t5);
  Rng rng(1);
  std::vector<int> counts(5, 0);
  for (int i = 0; i < 10000; ++i) ++counts[select_random(s5, rng)];
  EXPECT_EQ(counts[0], 0);
  for (int c = 1; c < 5; ++c) EXPECT_NEAR(counts[c] / 10000.0, 0.25, 0.02);
}

TEST(SemiAmortized, DeltaPosteriorEiIsGreedyOnTruth) {
  const std::vector<double> truth{0.3, 1.4, -0.2, 1.1};
  std::vector<double> ei(truth.size());
  for (std::size_t i = 0; i < truth.size(); ++i) ei[i] = acq_ei(truth[i], 1e-4, 0.5);
  EXPECT_EQ(argmax_lowest(ei), argmax_lowest(truth));
}

TEST(SemiAmortized, IdenticalMixturesTieToLowestIndex) {
  model::Model m(ficbo::testing::toy_config(), 2);
  for (auto& p : m.parameters())
    if (p.name.find(".ln") == std::string::npos) std::fill(p.value.begin(), p.value.end(), 0.0);
  const auto task = make_task(vec({0.0, 0.5, 0.2, 0.9, 0.1}), vec({0.1, 0.4, 0.3, 0.2, 0.8}), 3);
  auto state = episode::EpisodeState::initial(task);
  state.pool_mask[1] = false;
  EXPECT_EQ(select_semi_amortized(m, task.view(), state, {AcqKind::Ei, 1.0}), 2u);
  EXPECT_EQ(select_semi_amortized(m, task.view(), state, {AcqKind::Ucb, 1.0}), 2u);
}

TEST(Strategies, RespectMaskAndNeverRepeat) {
  Rng rng(3);
  Eigen::VectorXd y(30), u(30);
  for (int i = 0; i < 30; ++i) y[i] = rng.normal(), u[i] = y[i] + 0.3 * rng.normal();
  const auto task = make_task(y, u, 12);
  StrategyResources res;
  auto model = std::make_shared<model::Model>(ficbo::testing::toy_config(), 4);
  res.models["ficbo"] = model;
  res.models["gp_icbo"] = model;
  model::ModelConfig feat = ficbo::testing::toy_config();
  feat.feedback_mode = model::FeedbackMode::AsFeature;
  res.models["gp_icbo_feedback_feature"] = std::make_shared<model::Model>(feat, 5);
  for (const auto& name : strategy_names()) {
    auto s = make_strategy(name, res, &task);
    auto state = episode::EpisodeState::initial(task);
    std::set<std::size_t> seen;
    Rng srng(6);
    while (!state.done()) {
      const Decision d = s->decide(task.view(), state, srng);
      ASSERT_TRUE(state.pool_mask[d.index]) << name;
      EXPECT_TRUE(seen.insert(d.index).second) << name;
      EXPECT_EQ(d.candidates, state.remaining_indices()) << name;
      EXPECT_EQ(d.scores.size(), d.candidates.size()) << name;
      episode::step(state, task, d.index);
    }
  }
}

TEST(Strategies, OracleTakesPoolMaximumFirst) {
  const auto task = make_task(vec({0.0, 0.5, 2.0, 0.9}), vec({3, 2, 1, 0}), 2);
  auto s = make_strategy("oracle", {}, &task);
  Rng rng(7);
  EXPECT_EQ(s->decide(task.view(), episode::EpisodeState::initial(task), rng).index, 2u);
  EXPECT_THROW(make_strategy("nope", {}), std::invalid_argument);
  EXPECT_THROW(make_strategy("ficbo", {}), std::invalid_argument);
}
