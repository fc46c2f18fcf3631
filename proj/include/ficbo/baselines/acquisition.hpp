#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ficbo/episode/episode.hpp"
#include "ficbo/gp/gp.hpp"
#include "ficbo/prior/task.hpp"

namespace ficbo::baselines {

enum class AcqKind { Ei, Ucb };

struct AcquisitionSpec {
  AcqKind kind = AcqKind::Ei;
  double kappa = 1.0;
};

struct PiBoSpec {
  AcquisitionSpec base;
  double beta = 2.0;
};

inline constexpr double kPiBoScoreFloor = 1e-12;

double acq_ucb(double mean, double std, double kappa);
double acq_ei(double mean, double std, double y_plus);
double acquisition(const AcquisitionSpec& spec, double mean, double std, double y_plus);

// scores * softmax(feedback)^(beta / (t + 1)); scores are floored at 1e-12.
std::vector<double> pibo_adjust(std::span<const double> scores, std::span<const double> feedback, int t,
                                const PiBoSpec& spec);
// The same quantity in log space, safe against underflow of the weights.
std::vector<double> pibo_log_adjust(std::span<const double> scores, std::span<const double> feedback, int t,
                                    const PiBoSpec& spec);

// First index of the maximum.
std::size_t argmax_lowest(std::span<const double> scores);

// Fixed-kernel exact GP on the history: Matern-5/2, isotropic lengthscale
// sqrt(d)/2, output scale the sample variance of observed y (1 when fewer than
// two observations or zero spread), noise 1e-4, targets centred on their mean.
struct HistoryGp {
  gp::GpRegressor regressor;
  double y_mean;

  [[nodiscard]] gp::GpRegressor::Posterior posterior(const Eigen::MatrixXd& query) const;
};

HistoryGp fit_history_gp(const prior::OptimizerView& view, const episode::EpisodeState& state);

// Scores over state.remaining_indices(), in that order.
std::vector<double> score_gp_acq(const prior::OptimizerView& view, const episode::EpisodeState& state,
                                 const AcquisitionSpec& acq);

std::size_t select_gp_acq(const prior::OptimizerView& view, const episode::EpisodeState& state,
                          const AcquisitionSpec& acq);
std::size_t select_feedback_greedy(const prior::OptimizerView& view, const episode::EpisodeState& state);
std::size_t select_random(const episode::EpisodeState& state, Rng& rng);

}  // namespace ficbo::baselines
