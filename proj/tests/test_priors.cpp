#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <type_traits>

#include "ficbo/prior/priors.hpp"

using namespace ficbo;
using namespace ficbo::prior;

namespace {

TaskShape small_shape(int pool = 40, int targets = 10) {
  TaskShape s;
  s.pool_size = pool;
  s.horizon = {5, 8};
  s.n_targets = targets;
  return s;
}

double pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const Eigen::ArrayXd da = a.array() - a.mean(), db = b.array() - b.mean();
  return (da * db).sum() / std::sqrt((da * da).sum() * (db * db).sum());
}

}  // namespace

TEST(Additive, CombineEndpointsAndMidpoint) {
  Eigen::VectorXd fm(3), fs(3);
  fm << 1.0, -2.0, 0.5;
  fs << 0.3, 0.7, -1.1;
  EXPECT_EQ(combine_additive(fm, fs, 0.0), fm);
  EXPECT_EQ(combine_additive(fm, fs, 1.0), fs);
  const Eigen::VectorXd mid = combine_additive(fm, fs, 0.5);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(mid[i], (0.5 * fm[i] + 0.5 * fs[i]) / std::sqrt(0.5), 1e-15);
}

TEST(Additive, TaskShapeAndFeedbackEverywhere) {
  Rng rng(1);
  AdditivePriorConfig cfg;
  const auto shape = small_shape();
  for (int i = 0; i < 20; ++i) {
    const TaskInstance t = sample_additive_task(rng, cfg, bias::BiasConfig{}, shape);
    EXPECT_EQ(t.pool_x.cols(), 1);
    EXPECT_EQ(t.candidate_count(), 40u);
    EXPECT_EQ(t.pool_u.size(), t.pool_x.rows());
    EXPECT_TRUE(t.pool_u.allFinite());
    EXPECT_GE(t.horizon, 5);
    EXPECT_LE(t.horizon, 8);
    EXPECT_EQ(t.target_x.rows(), 10);
    EXPECT_EQ(t.meta.prior, PriorKind::Additive);
  }
}

TEST(Additive, NoModelComponentWhenAllCoordinatesShared) {
  AdditivePriorConfig cfg;
  cfg.overlap_choices = {1};
  cfg.d_src_choices = {1};
  TaskShape shape = small_shape();
  shape.d_model = 1;
  Rng rng(3);
  const TaskInstance t = sample_additive_task(rng, cfg, bias::BiasConfig::disabled(), shape);
  EXPECT_EQ(t.meta.w, 1.0);
  EXPECT_LT((t.latent.pool_clean - t.latent.pool_f_src).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Additive, VarianceNormalizationAtFixedPoint) {
  // y_total variance at one point equals E[output_scale] = 0.55 for any w.
  AdditivePriorConfig cfg;
  cfg.source_mode = SourceMode::Direct;
  cfg.overlap_choices = {0};
  cfg.d_src_choices = {1};
  TaskShape shape = small_shape(5, 0);
  shape.horizon = {5, 5};
  for (double w : {0.25, 0.5}) {
    cfg.w_min = cfg.w_max = w;
    Rng rng(40 + static_cast<int>(w * 100));
    double sum = 0.0, sq = 0.0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
      const auto t = sample_additive_task(rng, cfg, bias::BiasConfig::disabled(), shape);
      const double v = t.latent.pool_clean[0];
      sum += v;
      sq += v * v;
    }
    const double var = sq / n - (sum / n) * (sum / n);
    EXPECT_NEAR(var, 0.55, 0.1 * 0.55) << w;
  }
}

TEST(Additive, OptimizerViewHasNoSourceData) {
  // The view type exposes only pool inputs, feedback, context and horizon.
  static_assert(sizeof(OptimizerView) <= sizeof(void*) * 5 + sizeof(int) * 2);
  Rng rng(2);
  const auto t = sample_additive_task(rng, AdditivePriorConfig{}, bias::BiasConfig{}, small_shape());
  const OptimizerView v = t.view();
  EXPECT_EQ(&v.pool_x, &t.pool_x);
  EXPECT_EQ(v.pool_x.cols(), t.d_model());
  EXPECT_GT(t.latent.source_inputs.rows(), 0);
}

TEST(SourcePoints, SplitAndClusters) {
  Rng rng(4);
  const Eigen::MatrixXd all_uniform = sample_source_points(rng, 50, 1.0, 1.0, 3, 2);
  EXPECT_EQ(all_uniform.rows(), 50);
  EXPECT_LE(all_uniform.cwiseAbs().maxCoeff(), 5.0);
  const Eigen::MatrixXd tight = sample_source_points(rng, 40, 0.0, 1e-9, 1, 2);
  const Eigen::RowVectorXd c = tight.colwise().mean();
  for (Eigen::Index i = 0; i < 40; ++i) EXPECT_LT((tight.row(i) - c).norm(), 3e-9 * 2);
  // 25 uniform then 75 clustered: with a tiny std the clustered block collapses.
  const Eigen::MatrixXd mix = sample_source_points(rng, 100, 0.25, 1e-9, 1, 1);
  const Eigen::VectorXd tail = mix.col(0).tail(75);
  EXPECT_LT(tail.maxCoeff() - tail.minCoeff(), 1e-7);
  const Eigen::VectorXd head = mix.col(0).head(25);
  EXPECT_GT(head.maxCoeff() - head.minCoeff(), 1e-3);
}

TEST(SourceModel, DenseGridInterpolates) {
  Eigen::MatrixXd x(200, 1);
  for (int i = 0; i < 200; ++i) x(i, 0) = -5.0 + 10.0 * i / 199.0;
  const Eigen::VectorXd v = (x.col(0).array() * 0.8).sin().matrix();
  const auto k = gp::KernelSpec::isotropic_spec(gp::KernelFamily::Rbf, 1, 1.0, 1.0);
  const auto reg = build_source_model(x, v, k, 1e-8);
  EXPECT_LT((reg.predict_mean(x) - v).cwiseAbs().maxCoeff(), 1e-3);
  Eigen::MatrixXd one(1, 1);
  one << 0.0;
  const auto single = build_source_model(one, Eigen::VectorXd::Constant(1, 2.0), k, 1e-8);
  Eigen::MatrixXd far(1, 1);
  far << 40.0;
  EXPECT_NEAR(single.predict_mean(far)[0], 0.0, 1e-9);
}

TEST(Mixture, DirichletMaskProperties) {
  Rng rng(5);
  for (int i = 0; i < 500; ++i) {
    std::vector<int> active;
    const auto a = masked_dirichlet_weights(rng, 7, 0.5, 0.7, &active);
    ASSERT_FALSE(active.empty());
    EXPECT_EQ(active.front(), 0);
    double sum = 0.0;
    for (int k : active) sum += a[k];
    EXPECT_NEAR(sum / std::sqrt(static_cast<double>(active.size())), 1.0, 1e-12);
    for (int k = 0; k < 7; ++k)
      if (std::find(active.begin(), active.end(), k) == active.end()) EXPECT_EQ(a[k], 0.0);
  }
  const auto solo = masked_dirichlet_weights(rng, 4, 0.0, 0.7);
  EXPECT_EQ(solo[0], 1.0);
}

TEST(Mixture, RealOnlyFeedbackCorrelates) {
  // All decoys masked and the real components equally weighted means the
  // source signal is proportional to the objective.
  MixturePriorConfig cfg;
  cfg.k_decoy = {0, 0};
  cfg.p_src = 1.0;
  cfg.alpha_src = 1e6;
  TaskShape shape = small_shape(500, 0);
  Rng rng(6);
  const auto t = sample_mixture_task(rng, cfg, bias::BiasConfig::disabled(), shape);
  EXPECT_GT(pearson(t.pool_u, t.pool_y), 0.95);
  EXPECT_EQ(t.meta.prior, PriorKind::Mixture);
}

TEST(Dispatch, MetadataAndDefaults) {
  PriorSettings s;
  EXPECT_EQ(s.shape.pool_size, 200);
  EXPECT_EQ(s.shape.horizon.lo, 10);
  EXPECT_EQ(s.shape.horizon.hi, 20);
  EXPECT_EQ(s.shape.noise_std, 0.01);
  s.shape = small_shape();
  Rng rng(7);
  EXPECT_EQ(sample_task(rng, PriorKind::Additive, s).meta.prior, PriorKind::Additive);
  EXPECT_EQ(sample_task(rng, PriorKind::Mixture, s).meta.prior, PriorKind::Mixture);
  EXPECT_THROW(sample_task(rng, PriorKind::Benchmark, s), std::invalid_argument);
}

TEST(Dispatch, ObservationNoiseLevel) {
  PriorSettings s;
  s.shape = small_shape(200, 0);
  s.bias = bias::BiasConfig::disabled();
  Rng rng(8);
  const auto t = sample_task(rng, PriorKind::Additive, s);
  const Eigen::VectorXd e = t.pool_y - t.latent.pool_clean;
  const double sd = std::sqrt((e.array() - e.mean()).square().sum() / (e.size() - 1));
  EXPECT_NEAR(sd, 0.01, 0.002);
}

TEST(TaskJson, RoundTrip) {
  Rng rng(9);
  const auto t = sample_task(rng, PriorKind::Mixture, PriorSettings{{}, {}, {}, small_shape()});
  const auto j = task_to_json(t, true);
  const auto back = task_from_json(j);
  EXPECT_EQ(task_to_json(back, true).dump(), j.dump());
}
