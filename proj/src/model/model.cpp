#include "ficbo/model/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "ficbo/util/rng.hpp"

namespace ficbo::model {

std::string_view to_string(FeedbackMode m) {
  switch (m) {
    case FeedbackMode::Concat: return "concat";
    case FeedbackMode::Add: return "add";
    case FeedbackMode::Disabled: return "disabled";
    case FeedbackMode::AsFeature: return "as_feature";
  }
  return "unknown";
}

FeedbackMode feedback_mode_from_string(std::string_view s) {
  if (s == "concat") return FeedbackMode::Concat;
  if (s == "add") return FeedbackMode::Add;
  if (s == "disabled") return FeedbackMode::Disabled;
  if (s == "as_feature") return FeedbackMode::AsFeature;
  throw std::invalid_argument("unknown feedback mode: " + std::string(s));
}

void ModelConfig::validate() const {
  if (d_x < 1) throw std::invalid_argument("ModelConfig: d_x must be >= 1");
  if (d_embed < 2 || n_heads < 1 || d_embed % n_heads != 0)
    throw std::invalid_argument("ModelConfig: d_embed must be divisible by n_heads");
  if (feedback_mode == FeedbackMode::Concat && d_embed % 2 != 0)
    throw std::invalid_argument("ModelConfig: concat mode needs an even d_embed");
  if (n_layers < 0 || d_ff < 1) throw std::invalid_argument("ModelConfig: bad layer sizes");
  if (n_mixture < 1) throw std::invalid_argument("ModelConfig: n_mixture must be >= 1");
  if (dropout != 0.0) throw std::invalid_argument("ModelConfig: dropout is not supported");
  if (!(std_floor > 0.0)) throw std::invalid_argument("ModelConfig: std_floor must be positive");
}

void to_json(nlohmann::json& j, const ModelConfig& c) {
  j = nlohmann::json{{"d_x", c.d_x},
                     {"d_embed", c.d_embed},
                     {"n_layers", c.n_layers},
                     {"n_heads", c.n_heads},
                     {"d_ff", c.d_ff},
                     {"n_mixture", c.n_mixture},
                     {"dropout", c.dropout},
                     {"feedback_mode", to_string(c.feedback_mode)},
                     {"query_attends_queries", c.query_attends_queries},
                     {"use_time_token", c.use_time_token},
                     {"std_floor", c.std_floor}};
}

void from_json(const nlohmann::json& j, ModelConfig& c) {
  c.d_x = j.value("d_x", c.d_x);
  c.d_embed = j.value("d_embed", c.d_embed);
  c.n_layers = j.value("n_layers", c.n_layers);
  c.n_heads = j.value("n_heads", c.n_heads);
  c.d_ff = j.value("d_ff", c.d_ff);
  c.n_mixture = j.value("n_mixture", c.n_mixture);
  c.dropout = j.value("dropout", c.dropout);
  if (j.contains("feedback_mode")) c.feedback_mode = feedback_mode_from_string(j.at("feedback_mode").get<std::string>());
  c.query_attends_queries = j.value("query_attends_queries", c.query_attends_queries);
  c.use_time_token = j.value("use_time_token", c.use_time_token);
  c.std_floor = j.value("std_floor", c.std_floor);
  c.validate();
}

double GmmPosterior::mean() const {
  double m = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) m += weights[i] * means[i];
  return m;
}

double GmmPosterior::variance() const {
  double second = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) second += weights[i] * (stds[i] * stds[i] + means[i] * means[i]);
  const double m = mean();
  return std::max(second - m * m, 0.0);
}

double gmm_log_density(const GmmPosterior& post, double y) {
  const double half_log_2pi = 0.5 * std::log(2.0 * std::numbers::pi);
  double mx = -std::numeric_limits<double>::infinity();
  std::vector<double> terms(post.weights.size());
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const double z = (y - post.means[i]) / post.stds[i];
    terms[i] = std::log(post.weights[i]) - half_log_2pi - std::log(post.stds[i]) - 0.5 * z * z;
    mx = std::max(mx, terms[i]);
  }
  if (!std::isfinite(mx)) return mx;
  double s = 0.0;
  for (double t : terms) s += std::exp(t - mx);
  return mx + std::log(s);
}

GmmPosterior decode_gmm(const double* row, std::size_t k, double std_floor) {
  GmmPosterior p;
  p.weights.resize(k);
  p.means.assign(row + k, row + 2 * k);
  p.stds.resize(k);
  const double mx = *std::max_element(row, row + k);
  double s = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    p.weights[c] = std::exp(row[c] - mx);
    s += p.weights[c];
  }
  for (std::size_t c = 0; c < k; ++c) {
    p.weights[c] /= s;
    p.stds[c] = nn::softplus(row[2 * k + c]) + std_floor;
  }
  return p;
}

namespace {

TokenInputs assemble(const Eigen::MatrixXd& pool_x, const Eigen::VectorXd& pool_u, const episode::EpisodeState& state,
                     const Eigen::MatrixXd* target_x, const Eigen::VectorXd* target_u) {
  TokenInputs in;
  in.query_index = state.remaining_indices();
  in.n_context = state.history.size();
  in.n_query = in.query_index.size();
  in.n_target = target_x != nullptr ? static_cast<std::size_t>(target_x->rows()) : 0;
  const auto total = static_cast<Eigen::Index>(in.n_context + in.n_query + in.n_target);
  in.x.resize(total, pool_x.cols());
  in.u.resize(total);
  in.y_context.resize(static_cast<Eigen::Index>(in.n_context));
  Eigen::Index r = 0;
  for (const auto& obs : state.history) {
    in.x.row(r) = pool_x.row(static_cast<Eigen::Index>(obs.index));
    in.u[r] = obs.u;
    in.y_context[r] = obs.y;
    ++r;
  }
  for (std::size_t q : in.query_index) {
    in.x.row(r) = pool_x.row(static_cast<Eigen::Index>(q));
    in.u[r] = pool_u[static_cast<Eigen::Index>(q)];
    ++r;
  }
  for (std::size_t t = 0; t < in.n_target; ++t) {
    in.x.row(r) = target_x->row(static_cast<Eigen::Index>(t));
    in.u[r] = (*target_u)[static_cast<Eigen::Index>(t)];
    ++r;
  }
  return in;
}

}  // namespace

TokenInputs make_inputs(const prior::TaskInstance& task, const episode::EpisodeState& state, bool include_targets) {
  return include_targets ? assemble(task.pool_x, task.pool_u, state, &task.target_x, &task.target_u)
                         : assemble(task.pool_x, task.pool_u, state, nullptr, nullptr);
}

TokenInputs make_inputs(const prior::OptimizerView& view, const episode::EpisodeState& state) {
  return assemble(view.pool_x, view.pool_u, state, nullptr, nullptr);
}

Model::Dense Model::add_dense(const std::string& name, std::size_t in, std::size_t out) {
  params_.emplace_back(name + ".w", in, out);
  const std::size_t w = params_.size() - 1;
  params_.emplace_back(name + ".b", 1, out);
  return {w, params_.size() - 1};
}

std::size_t Model::add_vector(const std::string& name, std::size_t n, double fill) {
  params_.emplace_back(name, 1, n);
  std::fill(params_.back().value.begin(), params_.back().value.end(), fill);
  return params_.size() - 1;
}

Model::Mlp Model::add_mlp(const std::string& name, std::size_t in, std::size_t hidden, std::size_t out) {
  Mlp m;
  m.first = add_dense(name + ".0", in, hidden);
  m.second = add_dense(name + ".1", hidden, out);
  return m;
}

Model::Model(ModelConfig cfg, std::uint64_t seed) : cfg_(cfg) {
  cfg_.validate();
  const auto d = static_cast<std::size_t>(cfg_.d_embed);
  const auto dx = static_cast<std::size_t>(cfg_.d_x);
  const auto ff = static_cast<std::size_t>(cfg_.d_ff);
  switch (cfg_.feedback_mode) {
    case FeedbackMode::Concat:
      e_x_ = add_mlp("embed_x", dx, d, d / 2);
      e_u_ = add_mlp("embed_u", 1, d, d / 2);
      has_e_u_ = true;
      break;
    case FeedbackMode::Add:
      e_x_ = add_mlp("embed_x", dx, d, d);
      e_u_ = add_mlp("embed_u", 1, d, d);
      has_e_u_ = true;
      break;
    case FeedbackMode::Disabled:
      e_x_ = add_mlp("embed_x", dx, d, d);
      break;
    case FeedbackMode::AsFeature:
      e_x_ = add_mlp("embed_x", dx + 1, d, d);
      break;
  }
  e_y_ = add_mlp("embed_y", 1, d, d);
  for (int l = 0; l < cfg_.n_layers; ++l) {
    const std::string p = "layer" + std::to_string(l);
    Layer L{};
    L.ln1_g = add_vector(p + ".ln1.g", d, 1.0);
    L.ln1_b = add_vector(p + ".ln1.b", d, 0.0);
    L.qkv = add_dense(p + ".qkv", d, 3 * d);
    L.out = add_dense(p + ".attn_out", d, d);
    L.ln2_g = add_vector(p + ".ln2.g", d, 1.0);
    L.ln2_b = add_vector(p + ".ln2.b", d, 0.0);
    L.ff1 = add_dense(p + ".ff1", d, ff);
    L.ff2 = add_dense(p + ".ff2", ff, d);
    layers_.push_back(L);
  }
  policy_ = add_mlp("policy", d + (cfg_.use_time_token ? 1 : 0), ff, 1);
  gmm_ = add_dense("gmm", d, 3 * static_cast<std::size_t>(cfg_.n_mixture));

  Rng rng(seed);
  for (std::size_t i = 0; i < params_.size(); ++i) {
    nn::Parameter& p = params_[i];
    if (p.name.find(".ln") != std::string::npos) continue;
    // A bias takes the fan-in of the weight declared just before it.
    const std::size_t fan_in = p.name.ends_with(".b") ? params_[i - 1].rows : p.rows;
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (double& v : p.value) v = rng.uniform(-bound, bound);
  }
}

std::size_t Model::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.size();
  return n;
}

void Model::zero_grad() {
  for (auto& p : params_) std::fill(p.grad.begin(), p.grad.end(), 0.0);
}

nn::Var Model::apply(nn::Graph& g, const Dense& d, nn::Var x) { return g.linear(x, params_[d.w], params_[d.b]); }

nn::Var Model::apply(nn::Graph& g, const Mlp& m, nn::Var x) {
  return apply(g, m.second, g.relu(apply(g, m.first, x)));
}

namespace {

std::vector<double> row_major(const Eigen::MatrixXd& m) {
  std::vector<double> out(static_cast<std::size_t>(m.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out[static_cast<std::size_t>(i * m.cols() + j)] = m(i, j);
  return out;
}

std::vector<double> as_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

nn::Var Model::embed(nn::Graph& g, const TokenInputs& in) {
  const auto n = static_cast<std::size_t>(in.x.rows());
  if (in.x.cols() != cfg_.d_x) throw std::invalid_argument("Model: input dimension does not match d_x");
  nn::Var tokens;
  if (cfg_.feedback_mode == FeedbackMode::AsFeature) {
    Eigen::MatrixXd xu(in.x.rows(), in.x.cols() + 1);
    xu << in.x, in.u;
    tokens = apply(g, e_x_, g.constant(n, xu.cols(), row_major(xu)));
  } else {
    tokens = apply(g, e_x_, g.constant(n, in.x.cols(), row_major(in.x)));
    if (has_e_u_) {
      const nn::Var eu = apply(g, e_u_, g.constant(n, 1, as_vector(in.u)));
      tokens = cfg_.feedback_mode == FeedbackMode::Concat ? g.concat_cols(tokens, eu) : g.add(tokens, eu);
    }
  }
  if (in.n_context > 0) {
    const nn::Var ey = apply(g, e_y_, g.constant(in.n_context, 1, as_vector(in.y_context)));
    tokens = g.add_prefix_rows(tokens, ey);
  }
  return tokens;
}

nn::Var Model::backbone(nn::Graph& g, nn::Var tokens, const TokenInputs& in) {
  const std::size_t n_keys = in.n_context + (cfg_.query_attends_queries ? in.n_query : 0);
  nn::Var h = tokens;
  for (Layer& L : layers_) {
    const nn::Var a = g.layer_norm(h, params_[L.ln1_g], params_[L.ln1_b]);
    const nn::Var att = g.attention(apply(g, L.qkv, a), n_keys, static_cast<std::size_t>(cfg_.n_heads));
    h = g.add(h, apply(g, L.out, att));
    const nn::Var b = g.layer_norm(h, params_[L.ln2_g], params_[L.ln2_b]);
    h = g.add(h, apply(g, L.ff2, g.relu(apply(g, L.ff1, b))));
  }
  return h;
}

ForwardResult Model::forward(nn::Graph& g, const TokenInputs& in, double time_frac, bool want_policy, bool want_gmm) {
  if (in.n_context == 0) throw std::invalid_argument("Model: need at least one context token");
  const nn::Var h = backbone(g, embed(g, in), in);
  ForwardResult r;
  if (want_policy && in.n_query > 0) {
    nn::Var q = g.slice_rows(h, in.n_context, in.n_query);
    if (cfg_.use_time_token) q = g.concat_cols(q, g.constant(in.n_query, 1, std::vector<double>(in.n_query, time_frac)));
    r.log_probs = g.log_softmax(apply(g, policy_, q));
  }
  if (want_gmm && in.n_query + in.n_target > 0) {
    r.gmm = apply(g, gmm_, g.slice_rows(h, in.n_context, in.n_query + in.n_target));
  }
  return r;
}

PolicyDistribution Model::policy(const prior::OptimizerView& view, const episode::EpisodeState& state) {
  const TokenInputs in = make_inputs(view, state);
  if (in.n_query == 0) throw std::invalid_argument("Model::policy: no selectable candidates");
  nn::Graph g(false);
  const double frac = state.horizon > 0 ? static_cast<double>(state.step) / state.horizon : 0.0;
  const ForwardResult r = forward(g, in, frac, true, false);
  PolicyDistribution out;
  out.indices = in.query_index;
  out.log_probs = g.value(r.log_probs);
  out.probs.resize(out.log_probs.size());
  for (std::size_t i = 0; i < out.probs.size(); ++i) out.probs[i] = std::exp(out.log_probs[i]);
  // log_softmax differs from the raw logits by a constant; that is all callers need.
  out.logits = out.log_probs;
  return out;
}

std::vector<GmmPosterior> Model::predict(const prior::OptimizerView& view, const episode::EpisodeState& state) {
  const TokenInputs in = make_inputs(view, state);
  std::vector<GmmPosterior> out;
  if (in.n_query == 0) return out;
  nn::Graph g(false);
  const ForwardResult r = forward(g, in, 0.0, false, true);
  const auto k = static_cast<std::size_t>(cfg_.n_mixture);
  const auto& v = g.value(r.gmm);
  out.reserve(in.n_query);
  for (std::size_t i = 0; i < in.n_query; ++i) out.push_back(decode_gmm(v.data() + i * 3 * k, k, cfg_.std_floor));
  return out;
}

}  // namespace ficbo::model
