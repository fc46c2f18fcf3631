#pragma once

// Structured degradations of an ideal feedback signal. The pipeline applies
// noise, catastrophic replacement, additive GP bias, local distortion and a
// constant shift, in that order, each with its own activation probability.

#include <Eigen/Dense>
#include <nlohmann/json.hpp>
#include <optional>
#include <utility>

#include "ficbo/gp/kernel.hpp"
#include "ficbo/util/rng.hpp"

namespace ficbo::bias {

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

struct BiasConfig {
  double p_gp_bias = 0.2;
  double p_local = 0.2;
  double p_shift = 0.2;
  double p_catastrophic = 0.05;
  Range noise_scale{0.0, 0.2};
  Range gp_lengthscale{0.5, 3.0};
  Range gp_max_std{0.2, 1.0};
  Range gp_scale{0.2, 2.0};
  int local_centers_min = 1;
  int local_centers_max = 3;
  Range local_decay{0.5, 1.5};
  Range local_magnitude{0.2, 0.8};
  Range shift{-0.3, 0.3};

  void validate() const;
  // Every activation probability and the noise range collapsed to zero.
  static BiasConfig disabled();
};

// Diagnostics only; never part of the optimizer's view.
struct BiasRecord {
  double noise_sigma = 0.0;
  bool catastrophic = false;
  bool gp_bias = false;
  double gp_lengthscale = 0.0;
  double gp_scale = 0.0;
  double gp_max_std = 0.0;
  bool local = false;
  int local_centers = 0;
  double local_magnitude = 0.0;
  double local_decay = 0.0;
  bool shift = false;
  double shift_delta = 0.0;
};

Eigen::VectorXd bias_noise(Rng& rng, const Eigen::VectorXd& signal, double sigma);

Eigen::VectorXd bias_shift(const Eigen::VectorXd& signal, double delta);

// Adds an RBF-GP draw rescaled so its sample std is min(raw std, max_std).
Eigen::VectorXd bias_gp_additive(Rng& rng, const Eigen::VectorXd& signal, const Eigen::MatrixXd& points,
                                 double lengthscale, double scale, double max_std);

// Adds magnitude * exp(-|x - c|^2 / (2 decay^2)) for n_centers pool points c.
Eigen::VectorXd bias_local(Rng& rng, const Eigen::VectorXd& signal, const Eigen::MatrixXd& points, int n_centers,
                           double magnitude, double decay);

// Discards the signal and returns an independent GP draw over `points`.
Eigen::VectorXd bias_catastrophic(Rng& rng, const Eigen::VectorXd& signal, const Eigen::MatrixXd& points,
                                  const gp::KernelSpec& kernel);

std::pair<Eigen::VectorXd, BiasRecord> apply_bias_pipeline(Rng& rng, const Eigen::VectorXd& signal,
                                                           const Eigen::MatrixXd& points, const BiasConfig& cfg);

void to_json(nlohmann::json& j, const Range& r);
void from_json(const nlohmann::json& j, Range& r);
void to_json(nlohmann::json& j, const BiasConfig& c);
void from_json(const nlohmann::json& j, BiasConfig& c);
void to_json(nlohmann::json& j, const BiasRecord& r);
void from_json(const nlohmann::json& j, BiasRecord& r);

}  // namespace ficbo::bias
