#pragma once

#include <cstdint>
#include <map>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "ficbo/model/model.hpp"
#include "ficbo/prior/priors.hpp"
#include "ficbo/train/training.hpp"

namespace ficbo::harness {

struct ExperimentConfig {
  std::vector<std::string> strategies{"ficbo", "pibo_ei", "random"};
  // A benchmark name, or "prior:additive" / "prior:mixture" to evaluate on
  // fresh prior draws.
  std::string benchmark = "ackley";
  int dim = 1;
  std::string feedback = "marginal";
  double branin_a = 0.0;
  std::vector<std::uint64_t> seeds{0, 1, 2};
  int horizon = 30;
  int pool_size = 300;
  int n_context = 1;
  double noise = 0.01;
  // Checkpoint paths keyed by model role (see baselines::required_model).
  std::map<std::string, std::string> checkpoints;
  prior::PriorSettings prior;  // only read for prior:* tasks

  void validate() const;
};

void to_json(nlohmann::json& j, const ExperimentConfig& c);
void from_json(const nlohmann::json& j, ExperimentConfig& c);

// "0-99" or "0,3,7" or "5" style seed lists.
std::vector<std::uint64_t> parse_seed_list(const std::string& s);

struct TrainRunConfig {
  prior::PriorKind prior = prior::PriorKind::Additive;
  prior::PriorSettings settings;
  model::ModelConfig model;
  train::TrainingConfig training;
  std::uint64_t model_seed = 0;
};

void to_json(nlohmann::json& j, const TrainRunConfig& c);
void from_json(const nlohmann::json& j, TrainRunConfig& c);

nlohmann::json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const nlohmann::json& j);

}  // namespace ficbo::harness
