#pragma once

#include <cstdint>
#include <functional>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "ficbo/baselines/strategies.hpp"
#include "ficbo/harness/config.hpp"
#include "ficbo/prior/task.hpp"

namespace ficbo::harness {

struct RunRecord {
  std::uint64_t seed = 0;
  std::string strategy;
  std::string task_name;
  std::string task_hash;  // FNV-1a of the serialized task the run consumed
  std::vector<std::size_t> selections;
  std::vector<double> ys;
  std::vector<double> us;
  std::vector<double> rewards;
  std::vector<double> best_found;
  std::vector<double> regret;
  std::vector<double> agreement;
  std::string error;  // nonempty when the strategy threw; trajectories are then partial
  double wall_seconds = 0.0;  // not serialized with the record
};

nlohmann::json record_to_json(const RunRecord& r);
RunRecord record_from_json(const nlohmann::json& j);

std::string task_hash(const prior::TaskInstance& task);

// The task for one replica. Depends only on the config and the seed.
prior::TaskInstance make_replica_task(const ExperimentConfig& cfg, std::uint64_t seed);

baselines::StrategyResources load_resources(const ExperimentConfig& cfg);

// Runs one strategy on one task. Strategy randomness comes from
// Rng(seed).derive("strategy").derive(name).
RunRecord run_strategy(const std::string& strategy, const baselines::StrategyResources& resources,
                       const prior::TaskInstance& task, std::uint64_t seed);

struct ExperimentOutput {
  std::vector<RunRecord> records;  // seed-major, strategies in config order
  std::vector<prior::TaskInstance> tasks;  // one per seed
};

using RecordSink = std::function<void(const RunRecord&)>;

ExperimentOutput run_experiment(const ExperimentConfig& cfg, const baselines::StrategyResources& resources,
                                const RecordSink& sink = {});

// runs/<strategy>_seed<k>.json, tasks/seed_<k>.json, aggregate.csv,
// profiles.csv, timing.csv and config.json under out_dir.
void emit_results(const ExperimentOutput& out, const ExperimentConfig& cfg, const std::string& out_dir);

void write_record(const RunRecord& r, const std::string& out_dir);

}  // namespace ficbo::harness
