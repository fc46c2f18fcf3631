#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ficbo/bias/bias.hpp"

using namespace ficbo;
using namespace ficbo::bias;

namespace {

Eigen::MatrixXd grid_1d(int n, double lo = -5.0, double hi = 5.0) {
  Eigen::MatrixXd x(n, 1);
  for (int i = 0; i < n; ++i) x(i, 0) = lo + (hi - lo) * i / (n - 1);
  return x;
}

double pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const Eigen::ArrayXd da = a.array() - a.mean(), db = b.array() - b.mean();
  return (da * db).sum() / std::sqrt((da * da).sum() * (db * db).sum());
}

double sample_std(const Eigen::VectorXd& v) {
  const double m = v.mean();
  return std::sqrt((v.array() - m).square().sum() / static_cast<double>(v.size() - 1));
}

}  // namespace

TEST(BiasNoise, ZeroSigmaIsIdentity) {
  Rng rng(1);
  const Eigen::VectorXd s = Eigen::VectorXd::LinSpaced(10, -1, 1);
  EXPECT_EQ(bias_noise(rng, s, 0.0), s);
}

TEST(BiasNoise, MomentsMatch) {
  Rng rng(2);
  const int n = 100000;
  const Eigen::VectorXd s = Eigen::VectorXd::Zero(n);
  const Eigen::VectorXd d = bias_noise(rng, s, 0.2) - s;
  EXPECT_LT(std::abs(d.mean()), 3.0 * 0.2 / std::sqrt(static_cast<double>(n)));
  EXPECT_NEAR(sample_std(d), 0.2, 0.05 * 0.2);
}

TEST(BiasShift, ExactOffsetAndRanks) {
  Eigen::VectorXd s(2);
  s << 1.0, 2.0;
  const Eigen::VectorXd out = bias_shift(s, 0.3);
  EXPECT_DOUBLE_EQ(out[0], 1.3);
  EXPECT_DOUBLE_EQ(out[1], 2.3);
  EXPECT_EQ(bias_shift(s, 0.0), s);
}

TEST(BiasGp, CapAndLimit) {
  const Eigen::MatrixXd x = grid_1d(120);
  const Eigen::VectorXd s = Eigen::VectorXd::Zero(120);
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    Rng rng(seed);
    const Eigen::VectorXd d = bias_gp_additive(rng, s, x, 1.0, 2.0, 0.35) - s;
    EXPECT_LE(sample_std(d), 0.35 + 1e-6);
  }
  Rng rng(3);
  const Eigen::VectorXd tiny = bias_gp_additive(rng, s, x, 1.0, 1e-12, 0.5) - s;
  EXPECT_LT(tiny.cwiseAbs().maxCoeff(), 1e-4);
}

TEST(BiasGp, SmoothPerturbation) {
  const Eigen::MatrixXd x = grid_1d(100);
  const Eigen::VectorXd s = Eigen::VectorXd::Zero(100);
  double acc = 0.0;
  const int draws = 50;
  for (int k = 0; k < draws; ++k) {
    Rng rng(100 + k);
    const Eigen::VectorXd d = bias_gp_additive(rng, s, x, 3.0, 1.0, 1.0);
    acc += pearson(d.head(99), d.tail(99));
  }
  EXPECT_GT(acc / draws, 0.5);
}

TEST(BiasLocal, CenterTailAndZeroMagnitude) {
  const Eigen::MatrixXd x = grid_1d(201, -30.0, 30.0);
  const Eigen::VectorXd s = Eigen::VectorXd::Zero(201);
  Rng rng(4);
  const Eigen::VectorXd d = bias_local(rng, s, x, 1, 0.5, 0.7);
  Eigen::Index c = 0;
  d.cwiseAbs().maxCoeff(&c);
  EXPECT_GE(std::abs(d[c]), 0.5 - 1e-15);
  for (Eigen::Index i = 0; i < 201; ++i)
    if (std::abs(x(i, 0) - x(c, 0)) >= 6.0 * 0.7) EXPECT_LT(std::abs(d[i]), 0.5 * 1e-7);
  Rng rng2(4);
  EXPECT_EQ(bias_local(rng2, s, x, 2, 0.0, 1.0), s);
}

TEST(BiasCatastrophic, IgnoresInput) {
  const Eigen::MatrixXd x = grid_1d(300);
  const auto k = gp::KernelSpec::isotropic_spec(gp::KernelFamily::Matern52, 1, 1.0, 0.5);
  Rng a(5), b(5);
  const Eigen::VectorXd s1 = Eigen::VectorXd::LinSpaced(300, 0, 1);
  const Eigen::VectorXd s2 = Eigen::VectorXd::Random(300);
  EXPECT_EQ(bias_catastrophic(a, s1, x, k), bias_catastrophic(b, s2, x, k));
}

TEST(BiasCatastrophic, IndependenceAndMarginals) {
  const Eigen::MatrixXd x = grid_1d(300);
  const auto k = gp::KernelSpec::isotropic_spec(gp::KernelFamily::Matern52, 1, 1.0, 0.5);
  Rng in_rng(6);
  double corr = 0.0;
  std::vector<double> at_point;
  for (int d = 0; d < 200; ++d) {
    Eigen::VectorXd s(300);
    for (auto& v : s) v = in_rng.normal();
    Rng rng(1000 + d);
    const Eigen::VectorXd out = bias_catastrophic(rng, s, x, k);
    corr += pearson(s, out);
    at_point.push_back(out[150]);
  }
  EXPECT_LT(std::abs(corr / 200.0), 0.1);
  // Variance across many draws at one point; 200 draws is too few for 10%,
  // so extend with cheaper single-point draws from the same operator.
  const Eigen::MatrixXd one = grid_1d(2, 0.0, 1.0);
  for (int d = 0; d < 4800; ++d) {
    Rng rng(5000 + d);
    at_point.push_back(bias_catastrophic(rng, Eigen::VectorXd::Zero(2), one, k)[0]);
  }
  const double m = std::accumulate(at_point.begin(), at_point.end(), 0.0) / at_point.size();
  double v = 0.0;
  for (double a : at_point) v += (a - m) * (a - m);
  v /= static_cast<double>(at_point.size() - 1);
  EXPECT_NEAR(v, 0.5, 0.05);
}

TEST(BiasPipeline, DisabledIsIdentity) {
  Rng rng(7);
  const Eigen::MatrixXd x = grid_1d(20);
  const Eigen::VectorXd s = Eigen::VectorXd::LinSpaced(20, 0, 3);
  const auto [out, rec] = apply_bias_pipeline(rng, s, x, BiasConfig::disabled());
  EXPECT_EQ(out, s);
  EXPECT_FALSE(rec.catastrophic || rec.gp_bias || rec.local || rec.shift);
}

TEST(BiasPipeline, ActivationFrequencies) {
  const Eigen::MatrixXd x = grid_1d(8);
  const Eigen::VectorXd s = Eigen::VectorXd::Zero(8);
  Rng rng(8);
  int cat = 0, gpb = 0, loc = 0, sh = 0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const auto rec = apply_bias_pipeline(rng, s, x, BiasConfig{}).second;
    cat += rec.catastrophic;
    gpb += rec.gp_bias;
    loc += rec.local;
    sh += rec.shift;
  }
  EXPECT_NEAR(cat / double(n), 0.05, 0.02);
  EXPECT_NEAR(gpb / double(n), 0.2, 0.02);
  EXPECT_NEAR(loc / double(n), 0.2, 0.02);
  EXPECT_NEAR(sh / double(n), 0.2, 0.02);
}

TEST(BiasPipeline, RecordMatchesChanges) {
  const Eigen::MatrixXd x = grid_1d(30);
  const Eigen::VectorXd s = Eigen::VectorXd::LinSpaced(30, -1, 1);
  BiasConfig only_shift = BiasConfig::disabled();
  only_shift.p_shift = 1.0;
  Rng rng(9);
  const auto [out, rec] = apply_bias_pipeline(rng, s, x, only_shift);
  ASSERT_TRUE(rec.shift);
  EXPECT_LT((out - (s.array() + rec.shift_delta).matrix()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(BiasConfigJson, RoundTrip) {
  BiasConfig c;
  c.p_local = 0.33;
  c.shift = {-0.1, 0.2};
  const nlohmann::json j = c;
  const auto back = j.get<BiasConfig>();
  EXPECT_EQ(back.p_local, 0.33);
  EXPECT_EQ(back.shift.hi, 0.2);
}
