#include "ficbo/baselines/strategies.hpp"

#include <cmath>
#include <stdexcept>

namespace ficbo::baselines {

namespace {

Decision finish(std::vector<std::size_t> candidates, std::vector<double> scores) {
  Decision d;
  d.index = candidates.at(argmax_lowest(scores));
  d.candidates = std::move(candidates);
  d.scores = std::move(scores);
  return d;
}

std::vector<double> semi_scores(model::Model& model, const prior::OptimizerView& view,
                                const episode::EpisodeState& state, const AcquisitionSpec& acq) {
  const auto post = model.predict(view, state);
  std::vector<double> scores(post.size());
  for (std::size_t i = 0; i < post.size(); ++i)
    scores[i] = acquisition(acq, post[i].mean(), std::sqrt(post[i].variance()), state.best_so_far);
  return scores;
}

class PolicyStrategy final : public Strategy {
 public:
  PolicyStrategy(std::string name, std::shared_ptr<model::Model> m) : name_(std::move(name)), model_(std::move(m)) {}
  [[nodiscard]] std::string name() const override { return name_; }
  Decision decide(const prior::OptimizerView& view, const episode::EpisodeState& state, Rng&) override {
    auto dist = model_->policy(view, state);
    return finish(std::move(dist.indices), std::move(dist.log_probs));
  }

 private:
  std::string name_;
  std::shared_ptr<model::Model> model_;
};

class GpStrategy final : public Strategy {
 public:
  GpStrategy(std::string name, AcquisitionSpec acq, bool pibo) : name_(std::move(name)), acq_(acq), pibo_(pibo) {}
  [[nodiscard]] std::string name() const override { return name_; }
  Decision decide(const prior::OptimizerView& view, const episode::EpisodeState& state, Rng&) override {
    auto idx = state.remaining_indices();
    auto scores = score_gp_acq(view, state, acq_);
    if (pibo_) {
      std::vector<double> u(idx.size());
      for (std::size_t i = 0; i < idx.size(); ++i) u[i] = view.pool_u[static_cast<Eigen::Index>(idx[i])];
      scores = pibo_log_adjust(scores, u, state.step, PiBoSpec{acq_, 2.0});
    }
    return finish(std::move(idx), std::move(scores));
  }

 private:
  std::string name_;
  AcquisitionSpec acq_;
  bool pibo_;
};

class SemiAmortizedStrategy final : public Strategy {
 public:
  SemiAmortizedStrategy(std::string name, std::shared_ptr<model::Model> m, AcquisitionSpec acq)
      : name_(std::move(name)), model_(std::move(m)), acq_(acq) {}
  [[nodiscard]] std::string name() const override { return name_; }
  Decision decide(const prior::OptimizerView& view, const episode::EpisodeState& state, Rng&) override {
    return finish(state.remaining_indices(), semi_scores(*model_, view, state, acq_));
  }

 private:
  std::string name_;
  std::shared_ptr<model::Model> model_;
  AcquisitionSpec acq_;
};

class FeedbackStrategy final : public Strategy {
 public:
  [[nodiscard]] std::string name() const override { return "feedback"; }
  Decision decide(const prior::OptimizerView& view, const episode::EpisodeState& state, Rng&) override {
    auto idx = state.remaining_indices();
    std::vector<double> scores(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) scores[i] = view.pool_u[static_cast<Eigen::Index>(idx[i])];
    return finish(std::move(idx), std::move(scores));
  }
};

class RandomStrategy final : public Strategy {
 public:
  [[nodiscard]] std::string name() const override { return "random"; }
  Decision decide(const prior::OptimizerView&, const episode::EpisodeState& state, Rng& rng) override {
    auto idx = state.remaining_indices();
    std::vector<double> scores(idx.size());
    for (double& s : scores) s = rng.uniform();
    return finish(std::move(idx), std::move(scores));
  }
};

class OracleStrategy final : public Strategy {
 public:
  explicit OracleStrategy(const prior::TaskInstance& truth) : truth_(truth) {}
  [[nodiscard]] std::string name() const override { return "oracle"; }
  Decision decide(const prior::OptimizerView&, const episode::EpisodeState& state, Rng&) override {
    auto idx = state.remaining_indices();
    std::vector<double> scores(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) scores[i] = truth_.pool_y[static_cast<Eigen::Index>(idx[i])];
    return finish(std::move(idx), std::move(scores));
  }

 private:
  const prior::TaskInstance& truth_;
};

std::shared_ptr<model::Model> need_model(const StrategyResources& r, const std::string& key, const std::string& who) {
  const auto it = r.models.find(key);
  if (it == r.models.end() || !it->second)
    throw std::invalid_argument("strategy " + who + " needs a trained model (" + key + ")");
  return it->second;
}

}  // namespace

const std::vector<std::string>& strategy_names() {
  static const std::vector<std::string> names{"ficbo",  "gp_icbo", "gp_icbo_feedback_feature", "pibo_ei",
                                              "pibo_ucb", "gp_ei",  "gp_ucb",  "semi_ei",
                                              "semi_ucb", "feedback", "random",  "oracle"};
  return names;
}

std::string required_model(const std::string& strategy) {
  if (strategy == "ficbo" || strategy == "semi_ei" || strategy == "semi_ucb") return "ficbo";
  if (strategy == "gp_icbo") return "gp_icbo";
  if (strategy == "gp_icbo_feedback_feature") return "gp_icbo_feedback_feature";
  return {};
}

std::unique_ptr<Strategy> make_strategy(const std::string& name, const StrategyResources& resources,
                                        const prior::TaskInstance* truth) {
  const AcquisitionSpec ei{AcqKind::Ei, 1.0};
  const AcquisitionSpec ucb{AcqKind::Ucb, 1.0};
  if (name == "ficbo" || name == "gp_icbo" || name == "gp_icbo_feedback_feature")
    return std::make_unique<PolicyStrategy>(name, need_model(resources, required_model(name), name));
  if (name == "semi_ei") return std::make_unique<SemiAmortizedStrategy>(name, need_model(resources, "ficbo", name), ei);
  if (name == "semi_ucb") return std::make_unique<SemiAmortizedStrategy>(name, need_model(resources, "ficbo", name), ucb);
  if (name == "gp_ei") return std::make_unique<GpStrategy>(name, ei, false);
  if (name == "gp_ucb") return std::make_unique<GpStrategy>(name, ucb, false);
  if (name == "pibo_ei") return std::make_unique<GpStrategy>(name, ei, true);
  if (name == "pibo_ucb") return std::make_unique<GpStrategy>(name, ucb, true);
  if (name == "feedback") return std::make_unique<FeedbackStrategy>();
  if (name == "random") return std::make_unique<RandomStrategy>();
  if (name == "oracle") {
    if (truth == nullptr) throw std::invalid_argument("oracle strategy needs the task's stored objective");
    return std::make_unique<OracleStrategy>(*truth);
  }
  throw std::invalid_argument("unknown strategy: " + name);
}

std::size_t select_semi_amortized(model::Model& model, const prior::OptimizerView& view,
                                  const episode::EpisodeState& state, const AcquisitionSpec& acq) {
  const auto idx = state.remaining_indices();
  return idx.at(argmax_lowest(semi_scores(model, view, state, acq)));
}

}  // namespace ficbo::baselines
