#include "ficbo/bench/benchmarks.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ficbo/bench/gbt.hpp"

namespace ficbo::bench {

namespace {

bool is_analytic(std::string_view name) {
  const auto& names = function_names();
  return std::find(names.begin(), names.end(), name) != names.end();
}

std::vector<int> hidden_dims(int d, const std::vector<int>& expert) {
  std::vector<int> out;
  for (int i = 0; i < d; ++i)
    if (std::find(expert.begin(), expert.end(), i) == expert.end()) out.push_back(i);
  return out;
}

Eigen::MatrixXd uniform_normalized(Rng& rng, Eigen::Index n, Eigen::Index d) {
  Eigen::MatrixXd z(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) z(i, j) = rng.uniform(-kDesignScale, kDesignScale);
  return z;
}

Eigen::MatrixXd expert_columns(const Eigen::MatrixXd& z, const std::vector<int>& dims) {
  Eigen::MatrixXd out(z.rows(), static_cast<Eigen::Index>(dims.size()));
  for (std::size_t c = 0; c < dims.size(); ++c) out.col(static_cast<Eigen::Index>(c)) = z.col(dims[c]);
  return out;
}

}  // namespace

std::string_view to_string(FeedbackKind k) {
  switch (k) {
    case FeedbackKind::MarginalExpert: return "marginal";
    case FeedbackKind::TreeExpert: return "tree";
    case FeedbackKind::LowFidelity: return "low_fidelity";
    case FeedbackKind::ConversionProxy: return "conversion";
  }
  return "unknown";
}

FeedbackKind feedback_kind_from_string(std::string_view s) {
  if (s == "marginal") return FeedbackKind::MarginalExpert;
  if (s == "tree") return FeedbackKind::TreeExpert;
  if (s == "low_fidelity") return FeedbackKind::LowFidelity;
  if (s == "conversion") return FeedbackKind::ConversionProxy;
  throw std::invalid_argument("unknown feedback kind: " + std::string(s));
}

const std::vector<std::string>& benchmark_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n = function_names();
    n.emplace_back("branin_mf");
    n.emplace_back("reactor");
    return n;
  }();
  return names;
}

std::string BenchmarkSpec::label() const {
  std::string s = name + "_d" + std::to_string(d) + "_" + std::string(to_string(feedback));
  if (name == "branin_mf") {
    const int milli = static_cast<int>(std::lround(branin_a * 1000.0));
    s += "_a" + std::to_string(milli);
  }
  return s;
}

void BenchmarkSpec::validate() const {
  if (name == "branin_mf") {
    if (d != 2 || feedback != FeedbackKind::LowFidelity) throw std::invalid_argument("branin_mf: 2-D low-fidelity only");
    if (!(branin_a >= 0.0 && branin_a <= 1.0)) throw std::invalid_argument("branin_mf: a must lie in [0, 1]");
  } else if (name == "reactor") {
    if (d != 2 || feedback != FeedbackKind::ConversionProxy) throw std::invalid_argument("reactor: 2-D conversion only");
  } else {
    function_domain(name, d);
    if (feedback != FeedbackKind::MarginalExpert && feedback != FeedbackKind::TreeExpert)
      throw std::invalid_argument(name + ": feedback must be marginal or tree");
  }
  if (expert_dims.empty()) throw std::invalid_argument("benchmark: empty expert dimension set");
  for (int e : expert_dims)
    if (e < 0 || e >= d) throw std::invalid_argument("benchmark: expert dimension out of range");
  if (noise < 0.0 || n_marginal < 1 || n_expert_points < 0) throw std::invalid_argument("benchmark: bad sizes");
}

BenchmarkSpec make_benchmark(std::string_view name, int d, std::string_view feedback, double branin_a) {
  BenchmarkSpec s;
  s.name = std::string(name);
  if (name == "branin_mf") {
    s.d = 2;
    s.feedback = FeedbackKind::LowFidelity;
    s.branin_a = branin_a;
  } else if (name == "reactor") {
    s.d = 2;
    s.feedback = FeedbackKind::ConversionProxy;
  } else if (is_analytic(name)) {
    s.d = d;
    s.feedback = feedback_kind_from_string(feedback.empty() ? "marginal" : feedback);
  } else {
    throw std::invalid_argument("unknown benchmark: " + std::string(name));
  }
  s.expert_dims = {s.d - 1};
  s.validate();
  return s;
}

double benchmark_objective(const BenchmarkSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& z) {
  if (spec.name == "branin_mf") return branin_mf(to_domain(z, Box{{0.0, 0.0}, {1.0, 1.0}}, kDesignScale), Fidelity::High, spec.branin_a);
  if (spec.name == "reactor") {
    const Box box{{spec.reactor.tau_lo, spec.reactor.temp_lo}, {spec.reactor.tau_hi, spec.reactor.temp_hi}};
    const Eigen::VectorXd x = to_domain(z, box, kDesignScale);
    return reactor(x[0], x[1], spec.reactor).yield_b;
  }
  return eval_function(spec.name, to_domain(z, function_domain(spec.name, static_cast<int>(z.size())), kDesignScale));
}

double marginal_expert_feedback(std::string_view name, const Eigen::Ref<const Eigen::VectorXd>& z,
                                const std::vector<int>& expert_dims, const Eigen::MatrixXd& hidden_draws) {
  const int d = static_cast<int>(z.size());
  const Box box = function_domain(name, d);
  const std::vector<int> hidden = hidden_dims(d, expert_dims);
  if (hidden.empty()) return eval_function(name, to_domain(z, box, kDesignScale));
  if (hidden_draws.cols() != static_cast<Eigen::Index>(hidden.size()) || hidden_draws.rows() < 1)
    throw std::invalid_argument("marginal_expert_feedback: draw matrix does not match the hidden dimensions");
  Eigen::VectorXd point = z;
  double sum = 0.0;
  for (Eigen::Index l = 0; l < hidden_draws.rows(); ++l) {
    for (std::size_t c = 0; c < hidden.size(); ++c) point[hidden[c]] = hidden_draws(l, static_cast<Eigen::Index>(c));
    sum += eval_function(name, to_domain(point, box, kDesignScale));
  }
  return sum / static_cast<double>(hidden_draws.rows());
}

double marginal_expert_feedback(std::string_view name, const Eigen::Ref<const Eigen::VectorXd>& z,
                                const std::vector<int>& expert_dims, int n_draws, Rng& rng) {
  const auto hidden = hidden_dims(static_cast<int>(z.size()), expert_dims);
  if (hidden.empty()) return marginal_expert_feedback(name, z, expert_dims, Eigen::MatrixXd());
  const Eigen::MatrixXd draws = uniform_normalized(rng, n_draws, static_cast<Eigen::Index>(hidden.size()));
  return marginal_expert_feedback(name, z, expert_dims, draws);
}

prior::TaskInstance build_benchmark_pool(Rng& rng, const BenchmarkSpec& spec, int pool_size, int n_context,
                                         int horizon) {
  spec.validate();
  if (n_context < 1 || pool_size < horizon || horizon < 1)
    throw std::invalid_argument("build_benchmark_pool: need n_context >= 1 and horizon <= pool_size");
  const Eigen::Index n = pool_size + n_context;
  const Eigen::MatrixXd z = uniform_normalized(rng, n, spec.d);

  Eigen::VectorXd f(n);
  for (Eigen::Index i = 0; i < n; ++i) f[i] = benchmark_objective(spec, z.row(i).transpose());

  Eigen::VectorXd u(n);
  switch (spec.feedback) {
    case FeedbackKind::MarginalExpert: {
      const auto hidden = hidden_dims(spec.d, spec.expert_dims);
      const Eigen::MatrixXd draws =
          hidden.empty() ? Eigen::MatrixXd() : uniform_normalized(rng, spec.n_marginal, static_cast<Eigen::Index>(hidden.size()));
      for (Eigen::Index i = 0; i < n; ++i)
        u[i] = marginal_expert_feedback(spec.name, z.row(i).transpose(), spec.expert_dims, draws);
      break;
    }
    case FeedbackKind::TreeExpert: {
      const Eigen::MatrixXd extra = uniform_normalized(rng, spec.n_expert_points, spec.d);
      Eigen::MatrixXd train_z(spec.n_expert_points + n_context, spec.d);
      train_z << extra, z.topRows(n_context);
      Eigen::VectorXd train_f(train_z.rows());
      for (Eigen::Index i = 0; i < train_z.rows(); ++i) train_f[i] = benchmark_objective(spec, train_z.row(i).transpose());
      GradientBoostedTrees gbt;
      gbt.fit(expert_columns(train_z, spec.expert_dims), train_f);
      u = gbt.predict(expert_columns(z, spec.expert_dims));
      break;
    }
    case FeedbackKind::LowFidelity:
      for (Eigen::Index i = 0; i < n; ++i)
        u[i] = branin_mf(to_domain(z.row(i).transpose(), Box{{0.0, 0.0}, {1.0, 1.0}}, kDesignScale), Fidelity::Low,
                         spec.branin_a);
      break;
    case FeedbackKind::ConversionProxy: {
      const Box box{{spec.reactor.tau_lo, spec.reactor.temp_lo}, {spec.reactor.tau_hi, spec.reactor.temp_hi}};
      for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::VectorXd x = to_domain(z.row(i).transpose(), box, kDesignScale);
        u[i] = reactor(x[0], x[1], spec.reactor).conversion;
      }
      break;
    }
  }

  double shift = 0.0, scale = 1.0;
  if (spec.standardize) {
    shift = f.mean();
    const double sd = std::sqrt((f.array() - shift).square().sum() / static_cast<double>(n));
    if (sd > 0.0) scale = sd;
  }
  prior::TaskInstance task;
  task.pool_x = z;
  task.latent.pool_clean = (f.array() - shift) / scale;
  task.pool_u = ((u.array() - shift) / scale).matrix();
  task.pool_y = task.latent.pool_clean;
  for (Eigen::Index i = 0; i < n; ++i) task.pool_y[i] += spec.noise * rng.normal();
  task.context_init.resize(static_cast<std::size_t>(n_context));
  std::iota(task.context_init.begin(), task.context_init.end(), std::size_t{0});
  task.target_x = Eigen::MatrixXd(0, spec.d);
  task.target_y = Eigen::VectorXd(0);
  task.target_u = Eigen::VectorXd(0);
  task.horizon = horizon;
  task.latent.pool_full = z;
  task.meta.prior = prior::PriorKind::Benchmark;
  task.meta.name = spec.label();
  task.meta.split = prior::VisibilitySplit{spec.d, 0, spec.d};
  task.validate();
  return task;
}

}  // namespace ficbo::bench
