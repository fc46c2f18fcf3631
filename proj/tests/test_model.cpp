#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "ficbo/model/checkpoint.hpp"
#include "ficbo/model/model.hpp"
#include "gradcheck.hpp"
#include "test_util.hpp"

using namespace ficbo;
using namespace ficbo::model;

namespace {

std::vector<double> embed_values(Model& m, const TokenInputs& in) {
  nn::Graph g(false);
  return g.value(m.embed(g, in));
}

std::vector<double> backbone_values(Model& m, const TokenInputs& in) {
  nn::Graph g(false);
  return g.value(m.backbone(g, m.embed(g, in), in));
}

std::vector<double> rows_of(const std::vector<double>& v, std::size_t cols, std::size_t begin, std::size_t count) {
  return {v.begin() + static_cast<long>(begin * cols), v.begin() + static_cast<long>((begin + count) * cols)};
}

ModelConfig small(FeedbackMode mode) {
  ModelConfig c = ficbo::testing::toy_config();
  c.d_embed = 16;
  c.n_heads = 2;
  c.n_layers = 2;
  c.feedback_mode = mode;
  return c;
}

}  // namespace

TEST(Gmm, StandardNormalDensity) {
  const GmmPosterior p{{1.0}, {0.0}, {1.0}};
  EXPECT_NEAR(gmm_log_density(p, 0.0), -0.5 * std::log(2.0 * M_PI), 1e-12);
}

TEST(Gmm, DecodeInvariantsAndQuadrature) {
  Rng rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> row(15);
    for (auto& v : row) v = rng.normal(0.0, 2.0);
    const GmmPosterior p = decode_gmm(row.data(), 5, 1e-4);
    double ws = 0.0, smax = 0.0, lo = 1e300, hi = -1e300;
    for (std::size_t k = 0; k < 5; ++k) {
      ws += p.weights[k];
      EXPECT_GE(p.stds[k], 1e-4);
      smax = std::max(smax, p.stds[k]);
      lo = std::min(lo, p.means[k]);
      hi = std::max(hi, p.means[k]);
    }
    EXPECT_NEAR(ws, 1.0, 1e-6);
    // Trapezoid over every component's +-10 sigma window.
    const double a = lo - 10 * smax, b = hi + 10 * smax;
    const int n = 200000;
    double integral = 0.0;
    for (int i = 0; i <= n; ++i) {
      const double y = a + (b - a) * i / n;
      const double w = (i == 0 || i == n) ? 0.5 : 1.0;
      integral += w * std::exp(gmm_log_density(p, y));
    }
    integral *= (b - a) / n;
    EXPECT_NEAR(integral, 1.0, 1e-3);
  }
}

TEST(Gmm, MomentsMatchSampling) {
  const GmmPosterior p{{0.2, 0.5, 0.3}, {-1.0, 0.5, 2.0}, {0.3, 1.0, 0.6}};
  Rng rng(2);
  const int n = 400000;
  double s = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double r = rng.uniform();
    const std::size_t k = r < 0.2 ? 0 : (r < 0.7 ? 1 : 2);
    const double v = p.means[k] + p.stds[k] * rng.normal();
    s += v;
    sq += v * v;
  }
  const double mean = s / n, var = sq / n - mean * mean;
  EXPECT_NEAR(p.mean(), mean, 0.02 * std::abs(p.mean()));
  EXPECT_NEAR(p.variance(), var, 0.02 * p.variance());
  const GmmPosterior one{{1.0}, {0.7}, {0.4}};
  EXPECT_DOUBLE_EQ(one.mean(), 0.7);
  EXPECT_NEAR(one.variance(), 0.16, 1e-12);
}

TEST(Embed, DisabledIgnoresFeedback) {
  Model m(small(FeedbackMode::Disabled), 3);
  auto p = ficbo::testing::toy_problem(4).in;
  const auto a = embed_values(m, p);
  p.u.array() += 1.5;
  EXPECT_EQ(a, embed_values(m, p));
}

TEST(Embed, AddModeIsAdditive) {
  Model m(small(FeedbackMode::Add), 5);
  TokenInputs in;
  in.n_context = 0;
  in.n_query = 4;
  in.x.resize(4, 1);
  in.x << 0.3, 0.3, -1.2, -1.2;
  in.u.resize(4);
  in.u << 0.9, -0.4, 0.9, -0.4;
  in.query_index = {0, 1, 2, 3};
  const auto t = embed_values(m, in);
  const std::size_t d = 16;
  for (std::size_t c = 0; c < d; ++c)
    EXPECT_NEAR(t[0 * d + c] + t[3 * d + c], t[1 * d + c] + t[2 * d + c], 1e-12);
}

TEST(Embed, QueryTokensCarryNoLabel) {
  Eigen::VectorXd y = Eigen::VectorXd::LinSpaced(6, -1, 1);
  auto task = ficbo::testing::make_task(y, y * 0.5, 3);
  Model m(small(FeedbackMode::Concat), 6);
  const auto state = episode::EpisodeState::initial(task);
  const auto a = embed_values(m, make_inputs(task, state, false));
  task.pool_y[3] += 10.0;
  EXPECT_EQ(a, embed_values(m, make_inputs(task, state, false)));
}

TEST(Backbone, TargetsIgnoreQueriesWhenMasked) {
  ModelConfig c = small(FeedbackMode::Concat);
  c.query_attends_queries = false;
  Model m(c, 7);
  TokenInputs in = ficbo::testing::toy_problem(8).in;
  const auto full = backbone_values(m, in);
  // Drop query row 3.
  TokenInputs cut;
  cut.n_context = 2;
  cut.n_query = 1;
  cut.n_target = 2;
  cut.x.resize(5, 1);
  cut.u.resize(5);
  const int keep[] = {0, 1, 2, 4, 5};
  for (int r = 0; r < 5; ++r) {
    cut.x(r, 0) = in.x(keep[r], 0);
    cut.u[r] = in.u[keep[r]];
  }
  cut.y_context = in.y_context;
  cut.query_index = {2};
  const auto part = backbone_values(m, cut);
  const auto t_full = rows_of(full, 16, 4, 2), t_cut = rows_of(part, 16, 3, 2);
  for (std::size_t i = 0; i < t_full.size(); ++i) EXPECT_NEAR(t_full[i], t_cut[i], 1e-12);
}

TEST(Backbone, QueryPermutationEquivariance) {
  Model m(small(FeedbackMode::Concat), 9);
  TokenInputs in = ficbo::testing::toy_problem(10).in;
  in.n_target = 0;
  in.x.conservativeResize(4, 1);
  in.u.conservativeResize(4);
  TokenInputs sw = in;
  std::swap(sw.x(2, 0), sw.x(3, 0));
  std::swap(sw.u[2], sw.u[3]);
  const auto a = backbone_values(m, in), b = backbone_values(m, sw);
  const auto a2 = rows_of(a, 16, 2, 1), a3 = rows_of(a, 16, 3, 1);
  const auto b2 = rows_of(b, 16, 2, 1), b3 = rows_of(b, 16, 3, 1);
  for (std::size_t i = 0; i < 16; ++i) {
    EXPECT_NEAR(a2[i], b3[i], 1e-12);
    EXPECT_NEAR(a3[i], b2[i], 1e-12);
  }
}

TEST(Backbone, ZeroLayersIsIdentity) {
  ModelConfig c = small(FeedbackMode::Concat);
  c.n_layers = 0;
  Model m(c, 11);
  const TokenInputs in = ficbo::testing::toy_problem(12).in;
  EXPECT_EQ(embed_values(m, in), backbone_values(m, in));
}

TEST(Policy, DistributionInvariants) {
  Eigen::VectorXd y = Eigen::VectorXd::LinSpaced(6, -1, 1);
  const auto task = ficbo::testing::make_task(y, y, 5);
  Model m(small(FeedbackMode::Concat), 13);
  auto state = episode::EpisodeState::initial(task);
  const auto p = m.policy(task.view(), state);
  double s = 0.0;
  for (double v : p.probs) s += v;
  EXPECT_NEAR(s, 1.0, 1e-6);
  EXPECT_EQ(p.indices, state.remaining_indices());
  for (std::size_t i : {1, 2, 3, 4}) episode::step(state, task, i);
  const auto last = m.policy(task.view(), state);
  ASSERT_EQ(last.probs.size(), 1u);
  EXPECT_NEAR(last.probs[0], 1.0, 1e-15);
}

TEST(Policy, FeedbackSensitivity) {
  Eigen::VectorXd y = Eigen::VectorXd::LinSpaced(8, -1, 1);
  auto task = ficbo::testing::make_task(y, y, 5);
  Model m(small(FeedbackMode::Concat), 14);
  const auto state = episode::EpisodeState::initial(task);
  const auto a = m.policy(task.view(), state);
  task.pool_u[4] += 1.0;
  const auto b = m.policy(task.view(), state);
  // Row of candidate 4 among the queries 1..7 is 3; compare log-odds against candidate 1.
  EXPECT_GT(std::abs((b.log_probs[3] - b.log_probs[0]) - (a.log_probs[3] - a.log_probs[0])), 1e-6);
}

TEST(Policy, Deterministic) {
  Eigen::VectorXd y = Eigen::VectorXd::LinSpaced(8, -1, 1);
  const auto task = ficbo::testing::make_task(y, y, 5);
  Model m(small(FeedbackMode::Concat), 15);
  const auto state = episode::EpisodeState::initial(task);
  EXPECT_EQ(m.policy(task.view(), state).log_probs, m.policy(task.view(), state).log_probs);
}

TEST(Gradients, ToyModelMatchesFiniteDifferences) {
  for (auto mode : {FeedbackMode::Concat, FeedbackMode::Add, FeedbackMode::AsFeature}) {
    ModelConfig c = ficbo::testing::toy_config();
    c.feedback_mode = mode;
    Model m(c, 21);
    const auto res = ficbo::testing::gradient_check(m, ficbo::testing::toy_problem(22));
    EXPECT_LT(res.max_rel_error, 1e-3) << to_string(mode) << " worst " << res.worst_param;
  }
  ModelConfig c = ficbo::testing::toy_config();
  c.use_time_token = true;
  c.query_attends_queries = false;
  Model m(c, 23);
  EXPECT_LT(ficbo::testing::gradient_check(m, ficbo::testing::toy_problem(24)).max_rel_error, 1e-3);
}

TEST(Checkpoint, BitExactRoundTrip) {
  ModelConfig c = small(FeedbackMode::AsFeature);
  Model m(c, 31);
  const auto path = (std::filesystem::temp_directory_path() / "ficbo_test_model.ckpt").string();
  save_checkpoint(path, m, {{"note", "x"}});
  nlohmann::json extra;
  Model back = load_checkpoint(path, &extra);
  EXPECT_EQ(extra["note"], "x");
  ASSERT_EQ(back.parameters().size(), m.parameters().size());
  for (std::size_t i = 0; i < m.parameters().size(); ++i) {
    EXPECT_EQ(back.parameters()[i].name, m.parameters()[i].name);
    EXPECT_EQ(back.parameters()[i].value, m.parameters()[i].value);
  }
  const auto p = ficbo::testing::toy_problem(32);
  EXPECT_EQ(ficbo::testing::toy_loss(m, p, false), ficbo::testing::toy_loss(back, p, false));
  std::filesystem::remove(path);
}
