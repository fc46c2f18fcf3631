#include "ficbo/train/training.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

namespace ficbo::train {

namespace {

std::vector<double> supervision_targets(const prior::TaskInstance& task, const model::TokenInputs& in) {
  std::vector<double> y;
  y.reserve(in.n_query + in.n_target);
  for (std::size_t q : in.query_index) y.push_back(task.pool_y[static_cast<Eigen::Index>(q)]);
  for (std::size_t t = 0; t < in.n_target; ++t) y.push_back(task.target_y[static_cast<Eigen::Index>(t)]);
  return y;
}

std::size_t sample_categorical(const std::vector<double>& log_probs, Rng& rng) {
  const double r = rng.uniform();
  double acc = 0.0;
  for (std::size_t i = 0; i < log_probs.size(); ++i) {
    acc += std::exp(log_probs[i]);
    if (r < acc) return i;
  }
  return log_probs.size() - 1;
}

std::string_view mode_name(SelectionMode m) { return m == SelectionMode::Random ? "random" : "policy"; }

}  // namespace

void TrainingConfig::validate() const {
  if (!(lr > 0.0) || weight_decay < 0.0) throw std::invalid_argument("TrainingConfig: bad learning rate or decay");
  if (batch_size < 1 || n_iterations < 0) throw std::invalid_argument("TrainingConfig: bad batch or iteration count");
  if (warmup_iterations < 0 || warmup_iterations > n_iterations)
    throw std::invalid_argument("TrainingConfig: warmup must lie within the run");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("TrainingConfig: gamma out of [0,1]");
  if (lambda_pol < 0.0 || !(grad_clip_norm > 0.0)) throw std::invalid_argument("TrainingConfig: bad loss weights");
  if (warmup_pool_size < 0 || lr_t0 < 1 || lr_t_mult < 1) throw std::invalid_argument("TrainingConfig: bad schedule");
}

void to_json(nlohmann::json& j, const TrainingConfig& c) {
  j = nlohmann::json{{"lr", c.lr},
                     {"weight_decay", c.weight_decay},
                     {"batch_size", c.batch_size},
                     {"n_iterations", c.n_iterations},
                     {"warmup_iterations", c.warmup_iterations},
                     {"gamma", c.gamma},
                     {"lambda_pol", c.lambda_pol},
                     {"grad_clip_norm", c.grad_clip_norm},
                     {"logprob_clamp", c.logprob_clamp},
                     {"warmup_pool_size", c.warmup_pool_size},
                     {"lr_t0", c.lr_t0},
                     {"lr_t_mult", c.lr_t_mult},
                     {"normalize_returns", c.normalize_returns},
                     {"seed", c.seed},
                     {"log_every", c.log_every}};
}

void from_json(const nlohmann::json& j, TrainingConfig& c) {
  c.lr = j.value("lr", c.lr);
  c.weight_decay = j.value("weight_decay", c.weight_decay);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.n_iterations = j.value("n_iterations", c.n_iterations);
  c.warmup_iterations = j.value("warmup_iterations", c.warmup_iterations);
  c.gamma = j.value("gamma", c.gamma);
  c.lambda_pol = j.value("lambda_pol", c.lambda_pol);
  c.grad_clip_norm = j.value("grad_clip_norm", c.grad_clip_norm);
  c.logprob_clamp = j.value("logprob_clamp", c.logprob_clamp);
  c.warmup_pool_size = j.value("warmup_pool_size", c.warmup_pool_size);
  c.lr_t0 = j.value("lr_t0", c.lr_t0);
  c.lr_t_mult = j.value("lr_t_mult", c.lr_t_mult);
  c.normalize_returns = j.value("normalize_returns", c.normalize_returns);
  c.seed = j.value("seed", c.seed);
  c.log_every = j.value("log_every", c.log_every);
  c.validate();
}

Rollout rollout(model::Model& model, const prior::TaskInstance& task, SelectionMode mode, Rng& rng) {
  Rollout r;
  episode::EpisodeState state = episode::EpisodeState::initial(task);
  const auto k = static_cast<std::size_t>(model.config().n_mixture);
  while (!state.done()) {
    const model::TokenInputs in = model::make_inputs(task, state, true);
    const double frac = static_cast<double>(state.step) / state.horizon;
    const bool use_policy = mode == SelectionMode::Policy;
    const model::ForwardResult fr = model.forward(r.graph, in, frac, use_policy, true);
    r.nll.push_back(r.graph.gmm_nll(fr.gmm, supervision_targets(task, in), k, model.config().std_floor));
    std::size_t row;
    if (use_policy) {
      row = sample_categorical(r.graph.value(fr.log_probs), rng);
      const nn::Var lp = r.graph.pick(fr.log_probs, row);
      r.log_prob.push_back(lp);
      r.log_prob_value.push_back(r.graph.scalar(lp));
    } else {
      row = rng.index(in.n_query);
    }
    const std::size_t idx = in.query_index[row];
    const double reward = episode::step(state, task, idx);
    auto& tr = r.trajectory;
    tr.selections.push_back(idx);
    tr.ys.push_back(state.history.back().y);
    tr.us.push_back(state.history.back().u);
    tr.rewards.push_back(reward);
    tr.best_found.push_back(state.best_so_far);
  }
  return r;
}

double loss_pred(model::Model& model, std::span<const prior::TaskInstance> tasks,
                 std::span<const std::vector<std::size_t>> selections) {
  if (tasks.size() != selections.size() || tasks.empty()) throw std::invalid_argument("loss_pred: batch mismatch");
  const auto k = static_cast<std::size_t>(model.config().n_mixture);
  double total = 0.0;
  for (std::size_t b = 0; b < tasks.size(); ++b) {
    const auto& task = tasks[b];
    episode::EpisodeState state = episode::EpisodeState::initial(task);
    double task_sum = 0.0;
    for (std::size_t sel : selections[b]) {
      nn::Graph g(false);
      const model::TokenInputs in = model::make_inputs(task, state, true);
      const model::ForwardResult fr = model.forward(g, in, 0.0, false, true);
      task_sum += g.scalar(g.gmm_nll(fr.gmm, supervision_targets(task, in), k, model.config().std_floor));
      episode::step(state, task, sel);
    }
    if (selections[b].empty()) throw std::invalid_argument("loss_pred: empty trajectory");
    total += task_sum / static_cast<double>(selections[b].size());
  }
  return total / static_cast<double>(tasks.size());
}

double loss_pol(const std::vector<std::vector<double>>& log_probs, const Eigen::MatrixXd& normalized_returns,
                double clamp) {
  if (log_probs.empty() || static_cast<Eigen::Index>(log_probs.size()) != normalized_returns.rows())
    throw std::invalid_argument("loss_pol: batch mismatch");
  double total = 0.0;
  for (std::size_t b = 0; b < log_probs.size(); ++b) {
    if (static_cast<Eigen::Index>(log_probs[b].size()) != normalized_returns.cols())
      throw std::invalid_argument("loss_pol: horizon mismatch");
    for (std::size_t t = 0; t < log_probs[b].size(); ++t)
      total += std::max(log_probs[b][t], clamp) * normalized_returns(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(t));
  }
  return -total / static_cast<double>(log_probs.size());
}

IterationStats train_step(model::Model& model, AdamW& opt, std::span<const prior::TaskInstance> batch,
                          SelectionMode mode, const TrainingConfig& cfg, double lr, Rng& rng) {
  if (batch.empty()) throw std::invalid_argument("train_step: empty batch");
  const int horizon = batch.front().horizon;
  for (const auto& t : batch)
    if (t.horizon != horizon) throw std::invalid_argument("train_step: tasks in a batch must share a horizon");
  const auto nb = static_cast<double>(batch.size());

  std::vector<Rollout> rolls;
  rolls.reserve(batch.size());
  for (const auto& task : batch) rolls.push_back(rollout(model, task, mode, rng));

  IterationStats st;
  st.mode = mode;
  st.lr = lr;
  double reward_sum = 0.0;
  for (const auto& r : rolls) {
    double s = 0.0;
    for (nn::Var v : r.nll) s += r.graph.scalar(v);
    st.loss_pred += s / horizon;
    for (double rw : r.trajectory.rewards) reward_sum += rw;
  }
  st.loss_pred /= nb;
  st.mean_reward = reward_sum / (nb * horizon);

  Eigen::MatrixXd weights = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(batch.size()), horizon);
  if (mode == SelectionMode::Policy) {
    Eigen::MatrixXd returns(weights.rows(), horizon);
    std::vector<std::vector<double>> lps;
    for (std::size_t b = 0; b < rolls.size(); ++b) {
      const auto ret = episode::discounted_returns(rolls[b].trajectory.rewards, cfg.gamma);
      for (int t = 0; t < horizon; ++t) returns(static_cast<Eigen::Index>(b), t) = ret[static_cast<std::size_t>(t)];
      lps.push_back(rolls[b].log_prob_value);
    }
    weights = cfg.normalize_returns ? episode::normalize_returns_per_step(returns) : returns;
    st.loss_pol = loss_pol(lps, weights, cfg.logprob_clamp);
  }
  if (!std::isfinite(st.loss_pred) || !std::isfinite(st.loss_pol)) {
    std::ostringstream msg;
    msg << "non-finite loss (loss_pred=" << st.loss_pred << ", loss_pol=" << st.loss_pol << ", mode=" << mode_name(mode)
        << ", horizon=" << horizon << ")";
    throw std::runtime_error(msg.str());
  }

  model.zero_grad();
  for (std::size_t b = 0; b < rolls.size(); ++b) {
    std::vector<std::pair<nn::Var, double>> seeds;
    for (nn::Var v : rolls[b].nll) seeds.emplace_back(v, 1.0 / (nb * horizon));
    for (std::size_t t = 0; t < rolls[b].log_prob.size(); ++t) {
      if (rolls[b].log_prob_value[t] < cfg.logprob_clamp) continue;
      const double w = weights(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(t));
      seeds.emplace_back(rolls[b].log_prob[t], -cfg.lambda_pol * w / nb);
    }
    rolls[b].graph.backward(seeds);
  }
  st.grad_norm = clip_grad_norm(model.parameters(), cfg.grad_clip_norm);
  st.grad_norm_after = global_grad_norm(model.parameters());
  if (!std::isfinite(st.grad_norm)) throw std::runtime_error("non-finite gradient norm");
  opt.step(model.parameters(), lr);
  return st;
}

TaskSampler prior_sampler(prior::PriorKind kind, prior::PriorSettings settings) {
  return [kind, settings](Rng& rng, int horizon, int pool_size) {
    prior::PriorSettings s = settings;
    s.shape.horizon = {horizon, horizon};
    s.shape.pool_size = pool_size;
    return prior::sample_task(rng, kind, s);
  };
}

TrainResult train(model::Model& model, const TaskSampler& sampler, const prior::TaskShape& shape,
                  const TrainingConfig& cfg, const std::string& metrics_path) {
  cfg.validate();
  shape.validate();
  std::ofstream csv;
  if (!metrics_path.empty()) {
    csv.open(metrics_path, std::ios::trunc);
    if (!csv) throw std::runtime_error("cannot open metrics file: " + metrics_path);
    csv << "iteration,mode,loss_pred,loss_pol,lr,mean_reward,grad_norm\n";
  }
  AdamWConfig acfg;
  acfg.weight_decay = cfg.weight_decay;
  AdamW opt(model.parameters(), acfg);
  const Rng root(cfg.seed);
  TrainResult result;
  for (long i = 0; i < cfg.n_iterations; ++i) {
    Rng it_rng = root.derive(static_cast<std::uint64_t>(i));
    const bool warm = i < cfg.warmup_iterations;
    const int horizon = static_cast<int>(it_rng.integer(shape.horizon.lo, shape.horizon.hi));
    const int pool = warm ? (cfg.warmup_pool_size > 0 ? cfg.warmup_pool_size : horizon) : shape.pool_size;
    std::vector<prior::TaskInstance> batch;
    Rng task_rng = it_rng.derive("tasks");
    for (int b = 0; b < cfg.batch_size; ++b) batch.push_back(sampler(task_rng, horizon, pool));
    Rng roll_rng = it_rng.derive("rollouts");
    const double lr = cosine_restart_lr(cfg.lr, i, cfg.lr_t0, cfg.lr_t_mult);
    IterationStats st =
        train_step(model, opt, batch, warm ? SelectionMode::Random : SelectionMode::Policy, cfg, lr, roll_rng);
    st.iteration = i;
    if (csv) {
      csv << i << ',' << mode_name(st.mode) << ',' << st.loss_pred << ',' << st.loss_pol << ',' << st.lr << ','
          << st.mean_reward << ',' << st.grad_norm << '\n';
    }
    if (cfg.log_every > 0 && (i % cfg.log_every == 0 || i + 1 == cfg.n_iterations)) {
      std::cerr << "iter " << i << " [" << mode_name(st.mode) << "] loss_pred=" << st.loss_pred
                << " loss_pol=" << st.loss_pol << " reward=" << st.mean_reward << " lr=" << st.lr << '\n';
    }
    result.history.push_back(st);
  }
  return result;
}

}  // namespace ficbo::train
