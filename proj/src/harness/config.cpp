#include "ficbo/harness/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ficbo::harness {

using nlohmann::json;

void ExperimentConfig::validate() const {
  if (strategies.empty()) throw std::invalid_argument("experiment: no strategies");
  if (seeds.empty()) throw std::invalid_argument("experiment: no seeds");
  if (horizon < 1 || pool_size < horizon || n_context < 1)
    throw std::invalid_argument("experiment: need 1 <= horizon <= pool_size and n_context >= 1");
  if (noise < 0.0) throw std::invalid_argument("experiment: negative noise");
}

void to_json(json& j, const ExperimentConfig& c) {
  j = json{{"strategies", c.strategies}, {"benchmark", c.benchmark}, {"dim", c.dim},
           {"feedback", c.feedback},     {"branin_a", c.branin_a},   {"seeds", c.seeds},
           {"horizon", c.horizon},       {"pool_size", c.pool_size}, {"n_context", c.n_context},
           {"noise", c.noise},           {"checkpoints", c.checkpoints}, {"prior", c.prior}};
}

void from_json(const json& j, ExperimentConfig& c) {
  ExperimentConfig d;
  c.strategies = j.value("strategies", d.strategies);
  c.benchmark = j.value("benchmark", d.benchmark);
  c.dim = j.value("dim", d.dim);
  c.feedback = j.value("feedback", d.feedback);
  c.branin_a = j.value("branin_a", d.branin_a);
  if (j.contains("seeds")) {
    const json& s = j.at("seeds");
    c.seeds = s.is_string() ? parse_seed_list(s.get<std::string>()) : s.get<std::vector<std::uint64_t>>();
  } else {
    c.seeds = d.seeds;
  }
  c.horizon = j.value("horizon", d.horizon);
  c.pool_size = j.value("pool_size", d.pool_size);
  c.n_context = j.value("n_context", d.n_context);
  c.noise = j.value("noise", d.noise);
  c.checkpoints = j.value("checkpoints", d.checkpoints);
  c.prior = j.contains("prior") ? j.at("prior").get<prior::PriorSettings>() : d.prior;
  c.validate();
}

std::vector<std::uint64_t> parse_seed_list(const std::string& s) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, ',')) {
    if (part.empty()) continue;
    const auto dash = part.find('-');
    try {
      if (dash == std::string::npos) {
        out.push_back(std::stoull(part));
      } else {
        const auto lo = std::stoull(part.substr(0, dash)), hi = std::stoull(part.substr(dash + 1));
        if (hi < lo) throw std::invalid_argument("descending range");
        for (auto k = lo; k <= hi; ++k) out.push_back(k);
      }
    } catch (const std::exception&) {
      throw std::invalid_argument("bad seed list: " + s);
    }
  }
  if (out.empty()) throw std::invalid_argument("empty seed list");
  return out;
}

void to_json(json& j, const TrainRunConfig& c) {
  j = json{{"prior", to_string(c.prior)},
           {"settings", c.settings},
           {"model", c.model},
           {"training", c.training},
           {"model_seed", c.model_seed}};
}

void from_json(const json& j, TrainRunConfig& c) {
  TrainRunConfig d;
  c.prior = j.contains("prior") ? prior::prior_kind_from_string(j.at("prior").get<std::string>()) : d.prior;
  c.settings = j.contains("settings") ? j.at("settings").get<prior::PriorSettings>() : d.settings;
  c.model = j.contains("model") ? j.at("model").get<model::ModelConfig>() : d.model;
  c.training = j.contains("training") ? j.at("training").get<train::TrainingConfig>() : d.training;
  c.model_seed = j.value("model_seed", d.model_seed);
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace ficbo::harness
