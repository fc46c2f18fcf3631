#pragma once

// Named selection strategies sharing one interface. Every strategy scores the
// remaining pool and picks the first maximum, except that the oracle and the
// random strategy use privileged or random scores.

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "ficbo/baselines/acquisition.hpp"
#include "ficbo/model/model.hpp"

namespace ficbo::baselines {

struct Decision {
  std::size_t index = 0;
  std::vector<std::size_t> candidates;  // remaining pool rows, ascending
  std::vector<double> scores;           // aligned with candidates
};

class Strategy {
 public:
  virtual ~Strategy() = default;
  [[nodiscard]] virtual std::string name() const = 0;
  virtual Decision decide(const prior::OptimizerView& view, const episode::EpisodeState& state, Rng& rng) = 0;
};

// Trained networks keyed by role: "ficbo", "gp_icbo", "gp_icbo_feedback_feature".
struct StrategyResources {
  std::map<std::string, std::shared_ptr<model::Model>> models;
};

// Known names: ficbo, gp_icbo, gp_icbo_feedback_feature, pibo_ei, pibo_ucb,
// gp_ei, gp_ucb, semi_ei, semi_ucb, feedback, random, oracle. The oracle reads
// the stored objective of `truth`, which is required for it and ignored
// otherwise.
std::unique_ptr<Strategy> make_strategy(const std::string& name, const StrategyResources& resources,
                                        const prior::TaskInstance* truth = nullptr);

const std::vector<std::string>& strategy_names();

// Which model a strategy needs, or empty.
std::string required_model(const std::string& strategy);

std::size_t select_semi_amortized(model::Model& model, const prior::OptimizerView& view,
                                  const episode::EpisodeState& state, const AcquisitionSpec& acq);

}  // namespace ficbo::baselines
