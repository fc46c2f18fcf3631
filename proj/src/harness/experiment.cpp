#include "ficbo/harness/experiment.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "ficbo/bench/benchmarks.hpp"
#include "ficbo/episode/episode.hpp"
#include "ficbo/harness/metrics.hpp"
#include "ficbo/model/checkpoint.hpp"
#include "ficbo/prior/priors.hpp"

namespace ficbo::harness {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  return out;
}

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

json record_to_json(const RunRecord& r) {
  return json{{"seed", r.seed},           {"strategy", r.strategy},     {"task_name", r.task_name},
              {"task_hash", r.task_hash}, {"selections", r.selections}, {"y", r.ys},
              {"u", r.us},                {"reward", r.rewards},        {"best_found", r.best_found},
              {"regret", r.regret},       {"agreement", r.agreement},   {"error", r.error}};
}

RunRecord record_from_json(const json& j) {
  RunRecord r;
  r.seed = j.at("seed").get<std::uint64_t>();
  r.strategy = j.at("strategy").get<std::string>();
  r.task_name = j.at("task_name").get<std::string>();
  r.task_hash = j.at("task_hash").get<std::string>();
  r.selections = j.at("selections").get<std::vector<std::size_t>>();
  r.ys = j.at("y").get<std::vector<double>>();
  r.us = j.at("u").get<std::vector<double>>();
  r.rewards = j.at("reward").get<std::vector<double>>();
  r.best_found = j.at("best_found").get<std::vector<double>>();
  r.regret = j.at("regret").get<std::vector<double>>();
  r.agreement = j.at("agreement").get<std::vector<double>>();
  r.error = j.value("error", std::string{});
  return r;
}

std::string task_hash(const prior::TaskInstance& task) {
  const std::string s = prior::task_to_json(task, false).dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

prior::TaskInstance make_replica_task(const ExperimentConfig& cfg, std::uint64_t seed) {
  Rng rng = Rng(seed).derive("task");
  if (cfg.benchmark.rfind("prior:", 0) == 0) {
    prior::PriorSettings s = cfg.prior;
    s.shape.d_model = cfg.dim;
    s.shape.pool_size = cfg.pool_size;
    s.shape.horizon = {cfg.horizon, cfg.horizon};
    s.shape.n_context = cfg.n_context;
    s.shape.n_targets = 0;
    s.shape.noise_std = cfg.noise;
    return prior::sample_task(rng, prior::prior_kind_from_string(cfg.benchmark.substr(6)), s);
  }
  bench::BenchmarkSpec spec = bench::make_benchmark(cfg.benchmark, cfg.dim, cfg.feedback, cfg.branin_a);
  spec.noise = cfg.noise;
  return bench::build_benchmark_pool(rng, spec, cfg.pool_size, cfg.n_context, cfg.horizon);
}

baselines::StrategyResources load_resources(const ExperimentConfig& cfg) {
  baselines::StrategyResources res;
  for (const auto& name : cfg.strategies) {
    const std::string role = baselines::required_model(name);
    if (role.empty() || res.models.count(role)) continue;
    const auto it = cfg.checkpoints.find(role);
    if (it == cfg.checkpoints.end()) throw std::invalid_argument("strategy " + name + " needs a checkpoint for " + role);
    res.models[role] = std::make_shared<model::Model>(model::load_checkpoint(it->second));
  }
  return res;
}

RunRecord run_strategy(const std::string& strategy, const baselines::StrategyResources& resources,
                       const prior::TaskInstance& task, std::uint64_t seed) {
  RunRecord rec;
  rec.seed = seed;
  rec.strategy = strategy;
  rec.task_name = task.meta.name;
  rec.task_hash = task_hash(task);
  const auto t0 = std::chrono::steady_clock::now();
  try {
    auto strat = baselines::make_strategy(strategy, resources, &task);
    Rng rng = Rng(seed).derive("strategy").derive(strategy);
    const prior::OptimizerView view = task.view();
    episode::EpisodeState state = episode::EpisodeState::initial(task);
    std::vector<double> full_scores(static_cast<std::size_t>(task.pool_rows()));
    const std::vector<double> feedback(task.pool_u.data(), task.pool_u.data() + task.pool_u.size());
    while (!state.done()) {
      const baselines::Decision d = strat->decide(view, state, rng);
      std::fill(full_scores.begin(), full_scores.end(), 0.0);
      for (std::size_t c = 0; c < d.candidates.size(); ++c) full_scores[d.candidates[c]] = d.scores[c];
      rec.agreement.push_back(agreement_at_5(full_scores, feedback, state.pool_mask));
      const double r = episode::step(state, task, d.index);
      const auto& obs = state.history.back();
      rec.selections.push_back(d.index);
      rec.ys.push_back(obs.y);
      rec.us.push_back(obs.u);
      rec.rewards.push_back(r);
      rec.best_found.push_back(state.best_so_far);
    }
  } catch (const std::exception& e) {
    rec.error = e.what();
  }
  const RegretReference ref = regret_reference(task);
  rec.regret = cumulative_regret(rec.ys, ref.pool_max, ref.normalizer);
  rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

ExperimentOutput run_experiment(const ExperimentConfig& cfg, const baselines::StrategyResources& resources,
                                const RecordSink& sink) {
  cfg.validate();
  ExperimentOutput out;
  for (std::uint64_t seed : cfg.seeds) {
    out.tasks.push_back(make_replica_task(cfg, seed));
    const prior::TaskInstance& task = out.tasks.back();
    for (const auto& name : cfg.strategies) {
      // Every strategy gets its own copy of the shared task.
      const prior::TaskInstance copy = task;
      out.records.push_back(run_strategy(name, resources, copy, seed));
      if (sink) sink(out.records.back());
    }
  }
  return out;
}

void write_record(const RunRecord& r, const std::string& out_dir) {
  const fs::path dir = fs::path(out_dir) / "runs";
  fs::create_directories(dir);
  auto f = open_out(dir / (r.strategy + "_seed" + std::to_string(r.seed) + ".json"));
  f << record_to_json(r).dump(1) << '\n';
}

void emit_results(const ExperimentOutput& out, const ExperimentConfig& cfg, const std::string& out_dir) {
  const fs::path root(out_dir);
  fs::create_directories(root / "tasks");
  for (const auto& r : out.records) write_record(r, out_dir);
  for (std::size_t s = 0; s < out.tasks.size(); ++s) {
    auto f = open_out(root / "tasks" / ("seed_" + std::to_string(cfg.seeds[s]) + ".json"));
    f << prior::task_to_json(out.tasks[s], true).dump() << '\n';
  }
  {
    json meta = cfg;
    auto f = open_out(root / "config.json");
    f << meta.dump(2) << '\n';
  }

  auto agg = open_out(root / "aggregate.csv");
  agg << "strategy,step,n,regret_mean,regret_lo,regret_hi,best_mean,best_lo,best_hi,agreement_mean\n";
  for (std::size_t si = 0; si < cfg.strategies.size(); ++si) {
    const std::string& name = cfg.strategies[si];
    std::vector<const RunRecord*> runs;
    for (const auto& r : out.records)
      if (r.strategy == name && r.error.empty()) runs.push_back(&r);
    for (int t = 0; t < cfg.horizon; ++t) {
      std::vector<double> reg, best, agr;
      for (const RunRecord* r : runs) {
        if (static_cast<std::size_t>(t) >= r->regret.size()) continue;
        reg.push_back(r->regret[t]);
        best.push_back(r->best_found[t]);
        agr.push_back(r->agreement[t]);
      }
      agg << name << ',' << (t + 1) << ',' << reg.size();
      if (reg.empty()) {
        agg << ",,,,,,,\n";
        continue;
      }
      const std::uint64_t bseed = splitmix64(hash_tag(name) ^ static_cast<std::uint64_t>(t));
      const BootstrapCi rc = bootstrap_mean_ci(reg, 1000, bseed);
      const BootstrapCi bc = bootstrap_mean_ci(best, 1000, bseed + 1);
      double am = 0.0;
      for (double a : agr) am += a;
      am /= static_cast<double>(agr.size());
      agg << ',' << fmt_double(rc.mean) << ',' << fmt_double(rc.lo) << ',' << fmt_double(rc.hi) << ','
          << fmt_double(bc.mean) << ',' << fmt_double(bc.lo) << ',' << fmt_double(bc.hi) << ',' << fmt_double(am)
          << '\n';
    }
  }

  auto prof = open_out(root / "profiles.csv");
  prof << "seed,task";
  for (int b = 0; b < 20; ++b) prof << ",signed_" << b;
  for (int b = 0; b < 20; ++b) prof << ",abs_" << b;
  prof << '\n';
  for (std::size_t s = 0; s < out.tasks.size(); ++s) {
    const auto& t = out.tasks[s];
    const std::vector<double> y(t.pool_y.data(), t.pool_y.data() + t.pool_y.size());
    const std::vector<double> u(t.pool_u.data(), t.pool_u.data() + t.pool_u.size());
    prof << cfg.seeds[s] << ',' << t.meta.name;
    for (double v : feedback_profile(y, u, 20)) prof << ',' << fmt_double(v);
    prof << '\n';
  }

  auto timing = open_out(root / "timing.csv");
  timing << "strategy,seed,wall_seconds,error\n";
  for (const auto& r : out.records)
    timing << r.strategy << ',' << r.seed << ',' << fmt_double(r.wall_seconds) << ',' << (r.error.empty() ? "" : "1")
           << '\n';
}

}  // namespace ficbo::harness
