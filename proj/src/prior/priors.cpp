#include "ficbo/prior/priors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace ficbo::prior {

namespace {

Eigen::MatrixXd uniform_points(Rng& rng, Eigen::Index n, Eigen::Index d) {
  Eigen::MatrixXd x(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) x(i, j) = rng.uniform(-kDomainHalfWidth, kDomainHalfWidth);
  return x;
}

int choose(Rng& rng, const std::vector<int>& items) {
  return rng.choice(std::span<const int>(items));
}

int sample_horizon(Rng& rng, const TaskShape& shape) {
  return static_cast<int>(rng.integer(shape.horizon.lo, shape.horizon.hi));
}

Eigen::VectorXd add_noise(Rng& rng, const Eigen::VectorXd& clean, double sigma) {
  Eigen::VectorXd y = clean;
  for (Eigen::Index i = 0; i < y.size(); ++i) y[i] += sigma * rng.normal();
  return y;
}

std::vector<std::size_t> leading_context(int n) {
  std::vector<std::size_t> ctx(static_cast<std::size_t>(n));
  std::iota(ctx.begin(), ctx.end(), std::size_t{0});
  return ctx;
}

// Splits rows [0, n_pool) / [n_pool, n_pool + n_targets) of the shared draws.
void fill_pool_and_targets(TaskInstance& task, const TaskShape& shape, const Eigen::MatrixXd& x_model,
                           const Eigen::VectorXd& y, const Eigen::VectorXd& u) {
  const Eigen::Index n_pool = shape.pool_size + shape.n_context;
  const Eigen::Index n_t = shape.n_targets;
  task.pool_x = x_model.topRows(n_pool);
  task.pool_y = y.head(n_pool);
  task.pool_u = u.head(n_pool);
  task.target_x = x_model.middleRows(n_pool, n_t);
  task.target_y = y.segment(n_pool, n_t);
  task.target_u = u.segment(n_pool, n_t);
  task.context_init = leading_context(shape.n_context);
}

}  // namespace

void AdditivePriorConfig::validate() const {
  if (!(w_min >= 0.0 && w_min <= w_max && w_max <= 1.0)) throw std::invalid_argument("AdditivePriorConfig: bad w range");
  if (d_src_choices.empty() || overlap_choices.empty()) throw std::invalid_argument("AdditivePriorConfig: empty choice set");
  for (int v : d_src_choices)
    if (v < 0) throw std::invalid_argument("AdditivePriorConfig: negative d_src");
  for (int v : overlap_choices)
    if (v < 0) throw std::invalid_argument("AdditivePriorConfig: negative overlap");
  for (int v : n_src_choices)
    if (v < 1) throw std::invalid_argument("AdditivePriorConfig: n_src must be positive");
  if (!(uniform_fraction >= 0.0 && uniform_fraction <= 1.0))
    throw std::invalid_argument("AdditivePriorConfig: uniform_fraction out of [0,1]");
  if (!(cluster_std.lo > 0.0 && cluster_std.lo <= cluster_std.hi))
    throw std::invalid_argument("AdditivePriorConfig: bad cluster_std range");
  if (n_centers.lo < 1 || n_centers.hi < n_centers.lo) throw std::invalid_argument("AdditivePriorConfig: bad n_centers");
  if (source_model_noise < 0.0) throw std::invalid_argument("AdditivePriorConfig: negative source noise");
}

void MixturePriorConfig::validate() const {
  if (k_real < 1) throw std::invalid_argument("MixturePriorConfig: k_real must be >= 1");
  if (k_decoy.lo < 0 || k_decoy.hi < k_decoy.lo) throw std::invalid_argument("MixturePriorConfig: bad k_decoy range");
  if (!(alpha_src > 0.0)) throw std::invalid_argument("MixturePriorConfig: alpha_src must be positive");
  if (!(p_src >= 0.0 && p_src <= 1.0)) throw std::invalid_argument("MixturePriorConfig: p_src out of [0,1]");
}

void TaskShape::validate() const {
  if (d_model < 1) throw std::invalid_argument("TaskShape: d_model must be >= 1");
  if (n_context < 1) throw std::invalid_argument("TaskShape: need at least one context point");
  if (horizon.lo < 1 || horizon.hi < horizon.lo) throw std::invalid_argument("TaskShape: bad horizon range");
  if (n_targets < 0) throw std::invalid_argument("TaskShape: negative target count");
  if (noise_std < 0.0) throw std::invalid_argument("TaskShape: negative noise");
  if (pool_size < horizon.hi)
    throw std::invalid_argument("TaskShape: pool of " + std::to_string(pool_size) + " candidates cannot support horizon " +
                                std::to_string(horizon.hi));
}

Eigen::MatrixXd sample_source_points(Rng& rng, int n, double uniform_fraction, double cluster_std, int n_centers, int d) {
  if (n < 1) throw std::invalid_argument("sample_source_points: n must be >= 1");
  if (d < 1) throw std::invalid_argument("sample_source_points: d must be >= 1");
  if (!(uniform_fraction >= 0.0 && uniform_fraction <= 1.0))
    throw std::invalid_argument("sample_source_points: uniform_fraction out of [0,1]");
  const int n_uniform = std::min(n, static_cast<int>(std::ceil(uniform_fraction * n - 1e-9)));
  Eigen::MatrixXd pts(n, d);
  pts.topRows(n_uniform) = uniform_points(rng, n_uniform, d);
  if (n_uniform == n) return pts;
  if (n_centers < 1) throw std::invalid_argument("sample_source_points: need at least one cluster");
  const Eigen::MatrixXd centers = uniform_points(rng, n_centers, d);
  for (int i = n_uniform; i < n; ++i) {
    const auto c = static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(n_centers)));
    for (int j = 0; j < d; ++j) {
      const double v = centers(c, j) + cluster_std * rng.normal();
      pts(i, j) = std::clamp(v, -kDomainHalfWidth, kDomainHalfWidth);
    }
  }
  return pts;
}

gp::GpRegressor build_source_model(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& values,
                                   const gp::KernelSpec& kernel, double noise) {
  if (inputs.rows() < 1) throw std::invalid_argument("build_source_model: need at least one source point");
  return gp::GpRegressor(inputs, values, noise, kernel);
}

std::vector<double> masked_dirichlet_weights(Rng& rng, int k_total, double p_src, double alpha_src,
                                             std::vector<int>* active) {
  if (k_total < 1) throw std::invalid_argument("masked_dirichlet_weights: need at least one component");
  std::vector<int> s{0};
  for (int k = 1; k < k_total; ++k)
    if (rng.bernoulli(p_src)) s.push_back(k);
  const std::vector<double> bar = rng.dirichlet(alpha_src, s.size());
  const double scale = std::sqrt(static_cast<double>(s.size()));
  std::vector<double> a(static_cast<std::size_t>(k_total), 0.0);
  for (std::size_t i = 0; i < s.size(); ++i) a[static_cast<std::size_t>(s[i])] = scale * bar[i];
  if (active) *active = std::move(s);
  return a;
}

Eigen::VectorXd combine_additive(const Eigen::VectorXd& f_model, const Eigen::VectorXd& f_src, double w) {
  if (f_model.size() != f_src.size()) throw std::invalid_argument("combine_additive: size mismatch");
  const double norm = std::sqrt((1.0 - w) * (1.0 - w) + w * w);
  return ((1.0 - w) * f_model + w * f_src) / norm;
}

TaskInstance sample_additive_task(Rng& rng, const AdditivePriorConfig& cfg, const bias::BiasConfig& bias,
                                  const TaskShape& shape) {
  cfg.validate();
  shape.validate();
  TaskInstance task;
  task.horizon = sample_horizon(rng, shape);

  VisibilitySplit split;
  split.d_model = shape.d_model;
  split.d_src = choose(rng, cfg.d_src_choices);
  std::vector<int> overlaps;
  for (int o : cfg.overlap_choices)
    if (o <= shape.d_model) overlaps.push_back(o);
  if (overlaps.empty()) throw std::invalid_argument("sample_additive_task: no overlap choice fits d_model");
  split.overlap = choose(rng, overlaps);
  split.validate();

  const Eigen::Index m = shape.pool_size + shape.n_context + shape.n_targets;
  Eigen::MatrixXd x_all = uniform_points(rng, m, split.d_full());

  const bool model_based = cfg.source_mode == SourceMode::ModelBased;
  int n_src = 0;
  if (model_based) {
    const std::vector<int> defaults = shape.d_model == 1 ? std::vector<int>{10, 100} : std::vector<int>{30, 300};
    n_src = choose(rng, cfg.n_src_choices.empty() ? defaults : cfg.n_src_choices);
    const double cstd = rng.uniform(cfg.cluster_std.lo, cfg.cluster_std.hi);
    const int n_centers = static_cast<int>(rng.integer(cfg.n_centers.lo, cfg.n_centers.hi));
    const Eigen::MatrixXd src_visible =
        sample_source_points(rng, n_src, cfg.uniform_fraction, cstd, n_centers, split.d_source_visible());
    Eigen::MatrixXd src_full(n_src, split.d_full());
    src_full.leftCols(split.d_main()) = uniform_points(rng, n_src, split.d_main());
    src_full.rightCols(split.d_source_visible()) = src_visible;
    Eigen::MatrixXd stacked(m + n_src, split.d_full());
    stacked << x_all, src_full;
    x_all = std::move(stacked);
  }

  const gp::KernelSpec k_src = gp::sample_kernel_spec(rng, split.d_source_visible());
  const Eigen::VectorXd f_src = gp::sample_gp_joint(rng, k_src, split.source_view(x_all));
  Eigen::VectorXd f_model = Eigen::VectorXd::Zero(x_all.rows());
  double w = 1.0;
  if (split.d_main() > 0) {
    const gp::KernelSpec k_model = gp::sample_kernel_spec(rng, split.d_main());
    f_model = gp::sample_gp_joint(rng, k_model, split.main_view(x_all));
    w = rng.uniform(cfg.w_min, cfg.w_max);
  }
  const Eigen::VectorXd y_total = combine_additive(f_model, f_src, w);
  const Eigen::VectorXd& ideal = cfg.target_signal == TargetSignal::Hidden ? f_src : y_total;

  auto [distorted, record] = bias::apply_bias_pipeline(rng, ideal, x_all, bias);

  Eigen::VectorXd u(m);
  if (model_based) {
    const Eigen::MatrixXd src_inputs = split.source_view(x_all.bottomRows(n_src));
    const Eigen::VectorXd src_values = distorted.tail(n_src);
    const gp::KernelSpec k_fit = gp::sample_kernel_spec(rng, split.d_source_visible());
    const gp::GpRegressor source = build_source_model(src_inputs, src_values, k_fit, cfg.source_model_noise);
    u = source.predict_mean(split.source_view(x_all.topRows(m)));
    task.latent.source_inputs = src_inputs;
    task.latent.source_values = src_values;
  } else {
    u = distorted.head(m);
  }

  const Eigen::VectorXd clean = y_total.head(m);
  const Eigen::VectorXd y = add_noise(rng, clean, shape.noise_std);
  const Eigen::MatrixXd x_full = x_all.topRows(m);
  fill_pool_and_targets(task, shape, split.model_view(x_full), y, u);

  const Eigen::Index n_pool = shape.pool_size + shape.n_context;
  task.latent.pool_full = x_full.topRows(n_pool);
  task.latent.target_full = x_full.bottomRows(shape.n_targets);
  task.latent.pool_clean = clean.head(n_pool);
  task.latent.pool_f_model = f_model.head(n_pool);
  task.latent.pool_f_src = f_src.head(n_pool);
  task.latent.pool_ideal = ideal.head(n_pool);

  task.meta.prior = PriorKind::Additive;
  task.meta.name = "additive";
  task.meta.split = split;
  task.meta.w = w;
  task.meta.source_mode = cfg.source_mode;
  task.meta.target_signal = cfg.target_signal;
  task.meta.n_source_points = n_src;
  task.meta.bias = record;
  task.validate();
  return task;
}

TaskInstance sample_mixture_task(Rng& rng, const MixturePriorConfig& cfg, const bias::BiasConfig& bias,
                                 const TaskShape& shape) {
  cfg.validate();
  shape.validate();
  TaskInstance task;
  task.horizon = sample_horizon(rng, shape);

  const Eigen::Index m = shape.pool_size + shape.n_context + shape.n_targets;
  const Eigen::MatrixXd x = uniform_points(rng, m, shape.d_model);
  const int k_decoy = static_cast<int>(rng.integer(cfg.k_decoy.lo, cfg.k_decoy.hi));
  const int k_total = cfg.k_real + k_decoy;

  Eigen::MatrixXd z(m, k_total);
  for (int k = 0; k < k_total; ++k) {
    const gp::KernelSpec spec = gp::sample_kernel_spec(rng, shape.d_model);
    z.col(k) = gp::sample_gp_joint(rng, spec, x);
  }
  const Eigen::VectorXd clean = z.leftCols(cfg.k_real).rowwise().sum() / std::sqrt(static_cast<double>(cfg.k_real));

  std::vector<int> active;
  const std::vector<double> a = masked_dirichlet_weights(rng, k_total, cfg.p_src, cfg.alpha_src, &active);
  Eigen::VectorXd ideal = Eigen::VectorXd::Zero(m);
  for (int k = 0; k < k_total; ++k)
    if (a[static_cast<std::size_t>(k)] != 0.0) ideal += a[static_cast<std::size_t>(k)] * z.col(k);

  auto [u, record] = bias::apply_bias_pipeline(rng, ideal, x, bias);
  const Eigen::VectorXd y = add_noise(rng, clean, shape.noise_std);
  fill_pool_and_targets(task, shape, x, y, u);

  const Eigen::Index n_pool = shape.pool_size + shape.n_context;
  task.latent.pool_full = x.topRows(n_pool);
  task.latent.target_full = x.bottomRows(shape.n_targets);
  task.latent.pool_clean = clean.head(n_pool);
  task.latent.pool_ideal = ideal.head(n_pool);

  task.meta.prior = PriorKind::Mixture;
  task.meta.name = "mixture";
  task.meta.split = VisibilitySplit{shape.d_model, 0, shape.d_model};
  task.meta.w = 1.0;
  task.meta.k_real = cfg.k_real;
  task.meta.k_decoy = k_decoy;
  task.meta.source_weights = a;
  task.meta.active_components = std::move(active);
  task.meta.bias = record;
  task.validate();
  return task;
}

TaskInstance sample_task(Rng& rng, PriorKind kind, const PriorSettings& settings) {
  switch (kind) {
    case PriorKind::Additive:
      return sample_additive_task(rng, settings.additive, settings.bias, settings.shape);
    case PriorKind::Mixture:
      return sample_mixture_task(rng, settings.mixture, settings.bias, settings.shape);
    case PriorKind::Benchmark:
      break;
  }
  throw std::invalid_argument("sample_task: unknown prior kind " + std::string(to_string(kind)));
}

void to_json(nlohmann::json& j, const IntRange& r) { j = nlohmann::json::array({r.lo, r.hi}); }

void from_json(const nlohmann::json& j, IntRange& r) {
  if (!j.is_array() || j.size() != 2) throw std::invalid_argument("integer range must be a two-element array");
  r.lo = j[0].get<int>();
  r.hi = j[1].get<int>();
}

void to_json(nlohmann::json& j, const AdditivePriorConfig& c) {
  j = nlohmann::json{{"w_range", {c.w_min, c.w_max}},
                     {"d_src_choices", c.d_src_choices},
                     {"overlap_choices", c.overlap_choices},
                     {"n_src_choices", c.n_src_choices},
                     {"uniform_fraction", c.uniform_fraction},
                     {"cluster_std", c.cluster_std},
                     {"n_centers", c.n_centers},
                     {"source_mode", to_string(c.source_mode)},
                     {"target_signal", to_string(c.target_signal)},
                     {"source_model_noise", c.source_model_noise}};
}

void from_json(const nlohmann::json& j, AdditivePriorConfig& c) {
  if (j.contains("w_range")) {
    c.w_min = j.at("w_range").at(0).get<double>();
    c.w_max = j.at("w_range").at(1).get<double>();
  }
  if (j.contains("d_src_choices")) c.d_src_choices = j.at("d_src_choices").get<std::vector<int>>();
  if (j.contains("overlap_choices")) c.overlap_choices = j.at("overlap_choices").get<std::vector<int>>();
  if (j.contains("n_src_choices")) c.n_src_choices = j.at("n_src_choices").get<std::vector<int>>();
  c.uniform_fraction = j.value("uniform_fraction", c.uniform_fraction);
  if (j.contains("cluster_std")) c.cluster_std = j.at("cluster_std").get<bias::Range>();
  if (j.contains("n_centers")) c.n_centers = j.at("n_centers").get<IntRange>();
  if (j.contains("source_mode")) c.source_mode = source_mode_from_string(j.at("source_mode").get<std::string>());
  if (j.contains("target_signal")) c.target_signal = target_signal_from_string(j.at("target_signal").get<std::string>());
  c.source_model_noise = j.value("source_model_noise", c.source_model_noise);
  c.validate();
}

void to_json(nlohmann::json& j, const MixturePriorConfig& c) {
  j = nlohmann::json{{"k_real", c.k_real}, {"k_decoy", c.k_decoy}, {"alpha_src", c.alpha_src}, {"p_src", c.p_src}};
}

void from_json(const nlohmann::json& j, MixturePriorConfig& c) {
  c.k_real = j.value("k_real", c.k_real);
  if (j.contains("k_decoy")) c.k_decoy = j.at("k_decoy").get<IntRange>();
  c.alpha_src = j.value("alpha_src", c.alpha_src);
  c.p_src = j.value("p_src", c.p_src);
  c.validate();
}

void to_json(nlohmann::json& j, const TaskShape& c) {
  j = nlohmann::json{{"d_model", c.d_model},       {"pool_size", c.pool_size}, {"horizon", c.horizon},
                     {"n_context", c.n_context},   {"n_targets", c.n_targets}, {"noise_std", c.noise_std}};
}

void from_json(const nlohmann::json& j, TaskShape& c) {
  c.d_model = j.value("d_model", c.d_model);
  c.pool_size = j.value("pool_size", c.pool_size);
  if (j.contains("horizon")) c.horizon = j.at("horizon").get<IntRange>();
  c.n_context = j.value("n_context", c.n_context);
  c.n_targets = j.value("n_targets", c.n_targets);
  c.noise_std = j.value("noise_std", c.noise_std);
  c.validate();
}

void to_json(nlohmann::json& j, const PriorSettings& c) {
  j = nlohmann::json{{"additive", c.additive}, {"mixture", c.mixture}, {"bias", c.bias}, {"shape", c.shape}};
}

void from_json(const nlohmann::json& j, PriorSettings& c) {
  if (j.contains("additive")) c.additive = j.at("additive").get<AdditivePriorConfig>();
  if (j.contains("mixture")) c.mixture = j.at("mixture").get<MixturePriorConfig>();
  if (j.contains("bias")) c.bias = j.at("bias").get<bias::BiasConfig>();
  if (j.contains("shape")) c.shape = j.at("shape").get<TaskShape>();
}

}  // namespace ficbo::prior
