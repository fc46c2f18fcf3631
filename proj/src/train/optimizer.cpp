#include "ficbo/train/optimizer.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ficbo::train {

AdamW::AdamW(const std::vector<nn::Parameter>& params, AdamWConfig cfg) : cfg_(cfg) {
  for (const auto& p : params) {
    m_.emplace_back(p.size(), 0.0);
    v_.emplace_back(p.size(), 0.0);
  }
}

void AdamW::step(std::vector<nn::Parameter>& params, double lr) {
  if (params.size() != m_.size()) throw std::invalid_argument("AdamW: parameter set changed");
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params[i];
    auto& m = m_[i];
    auto& v = v_[i];
    for (std::size_t j = 0; j < p.size(); ++j) {
      const double g = p.grad[j];
      m[j] = cfg_.beta1 * m[j] + (1.0 - cfg_.beta1) * g;
      v[j] = cfg_.beta2 * v[j] + (1.0 - cfg_.beta2) * g * g;
      p.value[j] -= lr * cfg_.weight_decay * p.value[j];
      p.value[j] -= lr * (m[j] / bc1) / (std::sqrt(v[j] / bc2) + cfg_.eps);
    }
  }
}

double cosine_restart_lr(double base_lr, long iteration, long t0, long t_mult, double eta_min) {
  if (t0 < 1 || t_mult < 1) throw std::invalid_argument("cosine_restart_lr: bad period");
  long period = t0;
  long t = iteration;
  while (t >= period) {
    t -= period;
    period *= t_mult;
  }
  const double frac = static_cast<double>(t) / static_cast<double>(period);
  return eta_min + 0.5 * (base_lr - eta_min) * (1.0 + std::cos(std::numbers::pi * frac));
}

double global_grad_norm(const std::vector<nn::Parameter>& params) {
  double s = 0.0;
  for (const auto& p : params)
    for (double g : p.grad) s += g * g;
  return std::sqrt(s);
}

double clip_grad_norm(std::vector<nn::Parameter>& params, double max_norm) {
  const double norm = global_grad_norm(params);
  if (norm > max_norm && norm > 0.0) {
    const double scale = max_norm / norm;
    for (auto& p : params)
      for (double& g : p.grad) g *= scale;
  }
  return norm;
}

}  // namespace ficbo::train
