#include "ficbo/bias/bias.hpp"

#include <cmath>
#include <stdexcept>

#include "ficbo/gp/gp.hpp"

namespace ficbo::bias {

namespace {

void check_range(const Range& r, const char* name) {
  if (!(r.lo <= r.hi)) throw std::invalid_argument(std::string("BiasConfig: unordered range ") + name);
}

void check_prob(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument(std::string("BiasConfig: probability out of [0,1]: ") + name);
}

double sample_std(const Eigen::VectorXd& v) {
  if (v.size() < 2) return 0.0;
  const double mean = v.mean();
  return std::sqrt((v.array() - mean).square().sum() / static_cast<double>(v.size() - 1));
}

}  // namespace

void BiasConfig::validate() const {
  check_prob(p_gp_bias, "p_gp_bias");
  check_prob(p_local, "p_local");
  check_prob(p_shift, "p_shift");
  check_prob(p_catastrophic, "p_catastrophic");
  check_range(noise_scale, "noise_scale");
  check_range(gp_lengthscale, "gp_lengthscale");
  check_range(gp_max_std, "gp_max_std");
  check_range(gp_scale, "gp_scale");
  check_range(local_decay, "local_decay");
  check_range(local_magnitude, "local_magnitude");
  check_range(shift, "shift");
  if (local_centers_min < 1 || local_centers_max < local_centers_min) {
    throw std::invalid_argument("BiasConfig: bad local center range");
  }
  if (noise_scale.lo < 0.0) throw std::invalid_argument("BiasConfig: negative noise scale");
}

BiasConfig BiasConfig::disabled() {
  BiasConfig c;
  c.p_gp_bias = c.p_local = c.p_shift = c.p_catastrophic = 0.0;
  c.noise_scale = {0.0, 0.0};
  return c;
}

Eigen::VectorXd bias_noise(Rng& rng, const Eigen::VectorXd& signal, double sigma) {
  if (sigma < 0.0) throw std::invalid_argument("bias_noise: negative sigma");
  Eigen::VectorXd out = signal;
  if (sigma == 0.0) return out;
  for (Eigen::Index i = 0; i < out.size(); ++i) out[i] += sigma * rng.normal();
  return out;
}

Eigen::VectorXd bias_shift(const Eigen::VectorXd& signal, double delta) {
  return (signal.array() + delta).matrix();
}

Eigen::VectorXd bias_gp_additive(Rng& rng, const Eigen::VectorXd& signal, const Eigen::MatrixXd& points,
                                 double lengthscale, double scale, double max_std) {
  if (points.rows() != signal.size()) throw std::invalid_argument("bias_gp_additive: size mismatch");
  if (!(scale > 0.0) || !(lengthscale > 0.0) || max_std < 0.0) {
    throw std::invalid_argument("bias_gp_additive: parameters out of range");
  }
  const auto kernel = gp::KernelSpec::isotropic_spec(gp::KernelFamily::Rbf, points.cols(), lengthscale, scale);
  Eigen::VectorXd b = gp::sample_gp_joint(rng, kernel, points);
  const double raw = sample_std(b);
  if (raw > 0.0) b *= std::min(raw, max_std) / raw;
  return signal + b;
}

Eigen::VectorXd bias_local(Rng& rng, const Eigen::VectorXd& signal, const Eigen::MatrixXd& points, int n_centers,
                           double magnitude, double decay) {
  if (n_centers < 1) throw std::invalid_argument("bias_local: need at least one center");
  if (points.rows() != signal.size()) throw std::invalid_argument("bias_local: size mismatch");
  if (!(decay > 0.0)) throw std::invalid_argument("bias_local: decay must be positive");
  const auto n = static_cast<std::size_t>(points.rows());
  const auto k = std::min<std::size_t>(static_cast<std::size_t>(n_centers), n);
  const auto centers = rng.sample_without_replacement(n, k);
  Eigen::VectorXd out = signal;
  const double inv = 1.0 / (2.0 * decay * decay);
  for (const std::size_t c : centers) {
    const Eigen::RowVectorXd center = points.row(static_cast<Eigen::Index>(c));
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
      out[i] += magnitude * std::exp(-(points.row(i) - center).squaredNorm() * inv);
    }
  }
  return out;
}

Eigen::VectorXd bias_catastrophic(Rng& rng, const Eigen::VectorXd& signal, const Eigen::MatrixXd& points,
                                  const gp::KernelSpec& kernel) {
  if (points.rows() != signal.size()) throw std::invalid_argument("bias_catastrophic: size mismatch");
  return gp::sample_gp_joint(rng, kernel, points);
}

std::pair<Eigen::VectorXd, BiasRecord> apply_bias_pipeline(Rng& rng, const Eigen::VectorXd& signal,
                                                           const Eigen::MatrixXd& points, const BiasConfig& cfg) {
  cfg.validate();
  BiasRecord rec;
  Eigen::VectorXd out = signal;

  rec.noise_sigma = rng.uniform(cfg.noise_scale.lo, cfg.noise_scale.hi);
  out = bias_noise(rng, out, rec.noise_sigma);

  rec.catastrophic = rng.bernoulli(cfg.p_catastrophic);
  if (rec.catastrophic) {
    const gp::KernelSpec fresh = gp::sample_kernel_spec(rng, points.cols());
    out = bias_catastrophic(rng, out, points, fresh);
  }

  rec.gp_bias = rng.bernoulli(cfg.p_gp_bias);
  if (rec.gp_bias) {
    rec.gp_lengthscale = rng.uniform(cfg.gp_lengthscale.lo, cfg.gp_lengthscale.hi);
    rec.gp_max_std = rng.uniform(cfg.gp_max_std.lo, cfg.gp_max_std.hi);
    rec.gp_scale = rng.uniform(cfg.gp_scale.lo, cfg.gp_scale.hi);
    out = bias_gp_additive(rng, out, points, rec.gp_lengthscale, rec.gp_scale, rec.gp_max_std);
  }

  rec.local = rng.bernoulli(cfg.p_local);
  if (rec.local) {
    rec.local_centers = static_cast<int>(rng.integer(cfg.local_centers_min, cfg.local_centers_max));
    rec.local_decay = rng.uniform(cfg.local_decay.lo, cfg.local_decay.hi);
    rec.local_magnitude = rng.uniform(cfg.local_magnitude.lo, cfg.local_magnitude.hi);
    if (rng.bernoulli(0.5)) rec.local_magnitude = -rec.local_magnitude;
    out = bias_local(rng, out, points, rec.local_centers, rec.local_magnitude, rec.local_decay);
  }

  rec.shift = rng.bernoulli(cfg.p_shift);
  if (rec.shift) {
    rec.shift_delta = rng.uniform(cfg.shift.lo, cfg.shift.hi);
    out = bias_shift(out, rec.shift_delta);
  }
  return {std::move(out), rec};
}

void to_json(nlohmann::json& j, const Range& r) { j = nlohmann::json::array({r.lo, r.hi}); }

void from_json(const nlohmann::json& j, Range& r) {
  if (!j.is_array() || j.size() != 2) throw std::invalid_argument("range must be a two-element array");
  r.lo = j[0].get<double>();
  r.hi = j[1].get<double>();
}

void to_json(nlohmann::json& j, const BiasConfig& c) {
  j = nlohmann::json{{"p_gp_bias", c.p_gp_bias},
                     {"p_local", c.p_local},
                     {"p_shift", c.p_shift},
                     {"p_catastrophic", c.p_catastrophic},
                     {"noise_scale", c.noise_scale},
                     {"gp_lengthscale", c.gp_lengthscale},
                     {"gp_max_std", c.gp_max_std},
                     {"gp_scale", c.gp_scale},
                     {"local_centers", {c.local_centers_min, c.local_centers_max}},
                     {"local_decay", c.local_decay},
                     {"local_magnitude", c.local_magnitude},
                     {"shift", c.shift}};
}

void from_json(const nlohmann::json& j, BiasConfig& c) {
  c.p_gp_bias = j.value("p_gp_bias", c.p_gp_bias);
  c.p_local = j.value("p_local", c.p_local);
  c.p_shift = j.value("p_shift", c.p_shift);
  c.p_catastrophic = j.value("p_catastrophic", c.p_catastrophic);
  if (j.contains("noise_scale")) c.noise_scale = j.at("noise_scale").get<Range>();
  if (j.contains("gp_lengthscale")) c.gp_lengthscale = j.at("gp_lengthscale").get<Range>();
  if (j.contains("gp_max_std")) c.gp_max_std = j.at("gp_max_std").get<Range>();
  if (j.contains("gp_scale")) c.gp_scale = j.at("gp_scale").get<Range>();
  if (j.contains("local_centers")) {
    c.local_centers_min = j.at("local_centers").at(0).get<int>();
    c.local_centers_max = j.at("local_centers").at(1).get<int>();
  }
  if (j.contains("local_decay")) c.local_decay = j.at("local_decay").get<Range>();
  if (j.contains("local_magnitude")) c.local_magnitude = j.at("local_magnitude").get<Range>();
  if (j.contains("shift")) c.shift = j.at("shift").get<Range>();
  c.validate();
}

void to_json(nlohmann::json& j, const BiasRecord& r) {
  j = nlohmann::json{{"noise_sigma", r.noise_sigma},
                     {"catastrophic", r.catastrophic},
                     {"gp_bias", r.gp_bias},
                     {"gp_lengthscale", r.gp_lengthscale},
                     {"gp_scale", r.gp_scale},
                     {"gp_max_std", r.gp_max_std},
                     {"local", r.local},
                     {"local_centers", r.local_centers},
                     {"local_magnitude", r.local_magnitude},
                     {"local_decay", r.local_decay},
                     {"shift", r.shift},
                     {"shift_delta", r.shift_delta}};
}

void from_json(const nlohmann::json& j, BiasRecord& r) {
  r.noise_sigma = j.at("noise_sigma").get<double>();
  r.catastrophic = j.at("catastrophic").get<bool>();
  r.gp_bias = j.at("gp_bias").get<bool>();
  r.gp_lengthscale = j.at("gp_lengthscale").get<double>();
  r.gp_scale = j.at("gp_scale").get<double>();
  r.gp_max_std = j.at("gp_max_std").get<double>();
  r.local = j.at("local").get<bool>();
  r.local_centers = j.at("local_centers").get<int>();
  r.local_magnitude = j.at("local_magnitude").get<double>();
  r.local_decay = j.at("local_decay").get<double>();
  r.shift = j.at("shift").get<bool>();
  r.shift_delta = j.at("shift_delta").get<double>();
}

}  // namespace ficbo::bias
