#include "ficbo/baselines/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ficbo::baselines {

namespace {

double norm_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }
double norm_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

std::vector<double> log_softmax(std::span<const double> v) {
  const double mx = *std::max_element(v.begin(), v.end());
  double s = 0.0;
  for (double x : v) s += std::exp(x - mx);
  const double lse = mx + std::log(s);
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] - lse;
  return out;
}

}  // namespace

double acq_ucb(double mean, double std, double kappa) {
  if (std < 0.0) throw std::invalid_argument("acq_ucb: negative std");
  return mean + kappa * std;
}

double acq_ei(double mean, double std, double y_plus) {
  if (std < 0.0) throw std::invalid_argument("acq_ei: negative std");
  if (std == 0.0) return std::max(mean - y_plus, 0.0);
  const double z = (mean - y_plus) / std;
  return std::max((mean - y_plus) * norm_cdf(z) + std * norm_pdf(z), 0.0);
}

double acquisition(const AcquisitionSpec& spec, double mean, double std, double y_plus) {
  return spec.kind == AcqKind::Ei ? acq_ei(mean, std, y_plus) : acq_ucb(mean, std, spec.kappa);
}

std::vector<double> pibo_log_adjust(std::span<const double> scores, std::span<const double> feedback, int t,
                                    const PiBoSpec& spec) {
  if (scores.size() != feedback.size() || scores.empty()) throw std::invalid_argument("pibo_adjust: size mismatch");
  if (spec.beta < 0.0 || t < 0) throw std::invalid_argument("pibo_adjust: bad beta or step");
  const double expo = spec.beta / (t + 1.0);
  const std::vector<double> lu = log_softmax(feedback);
  std::vector<double> out(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) out[i] = std::log(std::max(scores[i], kPiBoScoreFloor)) + expo * lu[i];
  return out;
}

std::vector<double> pibo_adjust(std::span<const double> scores, std::span<const double> feedback, int t,
                                const PiBoSpec& spec) {
  if (spec.beta == 0.0) {
    std::vector<double> out(scores.begin(), scores.end());
    for (double& s : out) s = std::max(s, kPiBoScoreFloor);
    return out;
  }
  std::vector<double> out = pibo_log_adjust(scores, feedback, t, spec);
  for (double& v : out) v = std::exp(v);
  return out;
}

std::size_t argmax_lowest(std::span<const double> scores) {
  if (scores.empty()) throw std::invalid_argument("argmax over an empty set");
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i)
    if (scores[i] > scores[best]) best = i;
  return best;
}

gp::GpRegressor::Posterior HistoryGp::posterior(const Eigen::MatrixXd& query) const {
  gp::GpRegressor::Posterior p = regressor.posterior(query);
  p.mean.array() += y_mean;
  return p;
}

HistoryGp fit_history_gp(const prior::OptimizerView& view, const episode::EpisodeState& state) {
  const auto n = static_cast<Eigen::Index>(state.history.size());
  if (n < 1) throw std::invalid_argument("fit_history_gp: no observations");
  const Eigen::Index d = view.pool_x.cols();
  Eigen::MatrixXd x(n, d);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x.row(i) = view.pool_x.row(static_cast<Eigen::Index>(state.history[static_cast<std::size_t>(i)].index));
    y[i] = state.history[static_cast<std::size_t>(i)].y;
  }
  const double mean = y.mean();
  double scale = 1.0;
  if (n >= 2) {
    const double var = (y.array() - mean).square().sum() / static_cast<double>(n - 1);
    if (var > 0.0) scale = var;
  }
  auto kernel = gp::KernelSpec::isotropic_spec(gp::KernelFamily::Matern52, d, std::sqrt(static_cast<double>(d)) / 2.0, scale);
  return HistoryGp{gp::GpRegressor(x, (y.array() - mean).matrix(), 1e-4, std::move(kernel)), mean};
}

std::vector<double> score_gp_acq(const prior::OptimizerView& view, const episode::EpisodeState& state,
                                 const AcquisitionSpec& acq) {
  const auto idx = state.remaining_indices();
  if (idx.empty()) throw std::invalid_argument("score_gp_acq: empty pool");
  const HistoryGp model = fit_history_gp(view, state);
  Eigen::MatrixXd q(static_cast<Eigen::Index>(idx.size()), view.pool_x.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) q.row(static_cast<Eigen::Index>(i)) = view.pool_x.row(static_cast<Eigen::Index>(idx[i]));
  const auto post = model.posterior(q);
  std::vector<double> scores(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    scores[i] = acquisition(acq, post.mean[r], std::sqrt(post.variance[r]), state.best_so_far);
  }
  return scores;
}

std::size_t select_gp_acq(const prior::OptimizerView& view, const episode::EpisodeState& state,
                          const AcquisitionSpec& acq) {
  const auto idx = state.remaining_indices();
  return idx[argmax_lowest(score_gp_acq(view, state, acq))];
}

std::size_t select_feedback_greedy(const prior::OptimizerView& view, const episode::EpisodeState& state) {
  const auto idx = state.remaining_indices();
  if (idx.empty()) throw std::invalid_argument("select_feedback_greedy: empty pool");
  std::size_t best = idx.front();
  for (std::size_t i : idx)
    if (view.pool_u[static_cast<Eigen::Index>(i)] > view.pool_u[static_cast<Eigen::Index>(best)]) best = i;
  return best;
}

std::size_t select_random(const episode::EpisodeState& state, Rng& rng) {
  const auto idx = state.remaining_indices();
  if (idx.empty()) throw std::invalid_argument("select_random: empty pool");
  return idx[rng.index(idx.size())];
}

}  // namespace ficbo::baselines
