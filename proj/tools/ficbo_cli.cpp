#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include "ficbo/harness/config.hpp"
#include "ficbo/harness/experiment.hpp"
#include "ficbo/harness/metrics.hpp"
#include "ficbo/model/checkpoint.hpp"
#include "ficbo/prior/priors.hpp"
#include "ficbo/train/training.hpp"

namespace fs = std::filesystem;
using namespace ficbo;
using nlohmann::json;

namespace {

int cmd_generate(const std::string& prior_name, int dim, int count, std::uint64_t seed, const std::string& config,
                 bool latent, const std::string& out) {
  prior::PriorSettings s;
  if (!config.empty()) s = harness::read_json_file(config).get<prior::PriorSettings>();
  s.shape.d_model = dim;
  const auto kind = prior::prior_kind_from_string(prior_name);
  fs::create_directories(out);
  Rng root(seed);
  for (int i = 0; i < count; ++i) {
    Rng rng = root.derive(static_cast<std::uint64_t>(i));
    const auto task = prior::sample_task(rng, kind, s);
    std::ofstream f(fs::path(out) / ("task_" + std::to_string(i) + ".json"));
    if (!f) throw std::runtime_error("cannot write into " + out);
    f << prior::task_to_json(task, latent).dump() << '\n';
  }
  json meta{{"prior", prior_name}, {"seed", seed}, {"count", count}, {"settings", s}};
  harness::write_json_file((fs::path(out) / "generate.json").string(), meta);
  return 0;
}

int cmd_train(const std::string& prior_name, int dim, const std::string& config, const std::string& out,
              const std::string& metrics, const std::string& feedback_mode, int iterations) {
  harness::TrainRunConfig rc;
  if (!config.empty()) rc = harness::read_json_file(config).get<harness::TrainRunConfig>();
  if (!prior_name.empty()) rc.prior = prior::prior_kind_from_string(prior_name);
  if (dim > 0) {
    rc.settings.shape.d_model = dim;
    rc.model.d_x = dim;
  }
  rc.model.d_x = rc.settings.shape.d_model;
  if (!feedback_mode.empty()) rc.model.feedback_mode = model::feedback_mode_from_string(feedback_mode);
  if (iterations > 0) rc.training.n_iterations = iterations;
  rc.training.validate();

  model::Model m(rc.model, rc.model_seed);
  std::fprintf(stderr, "training %s prior, %zu parameters, %d iterations\n", std::string(prior::to_string(rc.prior)).c_str(),
               m.parameter_count(), rc.training.n_iterations);
  const auto sampler = train::prior_sampler(rc.prior, rc.settings);
  train::train(m, sampler, rc.settings.shape, rc.training, metrics);
  const fs::path parent = fs::path(out).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
  // Every resolved default goes into the checkpoint header.
  model::save_checkpoint(out, m, json{{"run", rc}});
  return 0;
}

int cmd_evaluate(harness::ExperimentConfig cfg, const std::string& out) {
  cfg.validate();
  const auto resources = harness::load_resources(cfg);
  fs::create_directories(out);
  const auto result = harness::run_experiment(cfg, resources, [&](const harness::RunRecord& r) {
    harness::write_record(r, out);
    if (!r.error.empty()) std::fprintf(stderr, "%s seed %llu failed: %s\n", r.strategy.c_str(),
                                       static_cast<unsigned long long>(r.seed), r.error.c_str());
  });
  harness::emit_results(result, cfg, out);
  for (const auto& name : cfg.strategies) {
    std::vector<double> finals;
    for (const auto& r : result.records)
      if (r.strategy == name && r.error.empty() && !r.regret.empty()) finals.push_back(r.regret.back());
    if (finals.empty()) continue;
    const auto ci = harness::bootstrap_mean_ci(finals, 1000, 0);
    std::printf("%-26s final regret %.4f [%.4f, %.4f]\n", name.c_str(), ci.mean, ci.lo, ci.hi);
  }
  return 0;
}

int cmd_diagnose(const std::string& dir) {
  const fs::path runs = fs::path(dir) / "runs";
  if (!fs::is_directory(runs)) throw std::runtime_error("no runs directory under " + dir);
  std::map<std::string, std::vector<double>> agree;
  for (const auto& entry : fs::directory_iterator(runs)) {
    if (entry.path().extension() != ".json") continue;
    const auto rec = harness::record_from_json(harness::read_json_file(entry.path().string()));
    for (double a : rec.agreement) agree[rec.strategy].push_back(a);
  }
  std::printf("strategy,mean_agreement_at_5\n");
  for (const auto& [name, v] : agree) {
    double s = 0.0;
    for (double a : v) s += a;
    std::printf("%s,%.4f\n", name.c_str(), v.empty() ? 0.0 : s / static_cast<double>(v.size()));
  }
  const fs::path tasks = fs::path(dir) / "tasks";
  if (fs::is_directory(tasks)) {
    std::ofstream prof(fs::path(dir) / "profiles_diagnose.csv");
    for (const auto& entry : fs::directory_iterator(tasks)) {
      const auto t = prior::task_from_json(harness::read_json_file(entry.path().string()));
      const std::vector<double> y(t.pool_y.data(), t.pool_y.data() + t.pool_y.size());
      const std::vector<double> u(t.pool_u.data(), t.pool_u.data() + t.pool_u.size());
      prof << entry.path().stem().string();
      for (double v : harness::feedback_profile(y, u, 20)) prof << ',' << v;
      prof << '\n';
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Feedback-informed in-context BO"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("generate", "Sample tasks from a prior");
  std::string g_prior = "additive", g_config, g_out = "tasks";
  int g_dim = 1, g_count = 10;
  std::uint64_t g_seed = 0;
  bool g_latent = false;
  gen->add_option("--prior", g_prior)->check(CLI::IsMember({"additive", "mixture"}));
  gen->add_option("--dim", g_dim);
  gen->add_option("--count", g_count);
  gen->add_option("--seed", g_seed);
  gen->add_option("--config", g_config, "PriorSettings JSON");
  gen->add_flag("--latent", g_latent, "Include latent arrays");
  gen->add_option("--out", g_out);

  auto* tr = app.add_subcommand("train", "Pretrain a model on a prior");
  std::string t_prior, t_config, t_out = "model.ckpt", t_metrics, t_mode;
  int t_dim = 0, t_iters = 0;
  tr->add_option("--prior", t_prior)->check(CLI::IsMember({"additive", "mixture"}));
  tr->add_option("--dim", t_dim);
  tr->add_option("--config", t_config, "Training run JSON");
  tr->add_option("--out", t_out, "Checkpoint path");
  tr->add_option("--metrics", t_metrics, "Per-iteration CSV");
  tr->add_option("--feedback-mode", t_mode, "concat, add, disabled or as_feature");
  tr->add_option("--iterations", t_iters);

  auto* ev = app.add_subcommand("evaluate", "Compare strategies on benchmark replicas");
  harness::ExperimentConfig ecfg;
  std::string e_config, e_seeds, e_out = "results", e_ckpt, e_ckpt_nofb, e_ckpt_feat;
  std::vector<std::string> e_strats;
  ev->add_option("--config", e_config, "Experiment JSON; flags override it");
  ev->add_option("--strategies", e_strats)->delimiter(',');
  ev->add_option("--benchmark", ecfg.benchmark);
  ev->add_option("--dim", ecfg.dim);
  ev->add_option("--feedback", ecfg.feedback);
  ev->add_option("--branin-a", ecfg.branin_a);
  ev->add_option("--seeds", e_seeds, "e.g. 0-99 or 1,2,3");
  ev->add_option("--horizon", ecfg.horizon);
  ev->add_option("--pool-size", ecfg.pool_size);
  ev->add_option("--checkpoint", e_ckpt, "FICBO checkpoint");
  ev->add_option("--checkpoint-no-feedback", e_ckpt_nofb);
  ev->add_option("--checkpoint-feedback-feature", e_ckpt_feat);
  ev->add_option("--out", e_out);

  auto* dg = app.add_subcommand("diagnose", "Agreement and profiles from an evaluate directory");
  std::string d_dir = "results";
  dg->add_option("dir", d_dir);

  CLI11_PARSE(app, argc, argv);
  try {
    if (*gen) return cmd_generate(g_prior, g_dim, g_count, g_seed, g_config, g_latent, g_out);
    if (*tr) return cmd_train(t_prior, t_dim, t_config, t_out, t_metrics, t_mode, t_iters);
    if (*ev) {
      if (!e_config.empty()) {
        // Start from the file and let explicit flags win.
        harness::ExperimentConfig file = harness::read_json_file(e_config).get<harness::ExperimentConfig>();
        for (const auto* opt : ev->get_options()) {
          if (opt->count() == 0) continue;
          const std::string n = opt->get_name();
          if (n == "--benchmark") file.benchmark = ecfg.benchmark;
          if (n == "--dim") file.dim = ecfg.dim;
          if (n == "--feedback") file.feedback = ecfg.feedback;
          if (n == "--branin-a") file.branin_a = ecfg.branin_a;
          if (n == "--horizon") file.horizon = ecfg.horizon;
          if (n == "--pool-size") file.pool_size = ecfg.pool_size;
        }
        ecfg = file;
      }
      if (!e_strats.empty()) ecfg.strategies = e_strats;
      if (!e_seeds.empty()) ecfg.seeds = harness::parse_seed_list(e_seeds);
      if (!e_ckpt.empty()) ecfg.checkpoints["ficbo"] = e_ckpt;
      if (!e_ckpt_nofb.empty()) ecfg.checkpoints["gp_icbo"] = e_ckpt_nofb;
      if (!e_ckpt_feat.empty()) ecfg.checkpoints["gp_icbo_feedback_feature"] = e_ckpt_feat;
      return cmd_evaluate(ecfg, e_out);
    }
    if (*dg) return cmd_diagnose(d_dir);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
