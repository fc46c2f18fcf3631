#include "ficbo/bench/functions.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ficbo::bench {

namespace {

constexpr double kPi = std::numbers::pi;

double sphere(const Eigen::VectorXd& x) { return -x.squaredNorm(); }

double ackley(const Eigen::VectorXd& x) {
  const double d = static_cast<double>(x.size());
  double cos_sum = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) cos_sum += std::cos(2.0 * kPi * x[i]);
  return 20.0 * std::exp(-0.2 * std::sqrt(x.squaredNorm() / d)) + std::exp(cos_sum / d) - 20.0 - std::numbers::e;
}

double rastrigin(const Eigen::VectorXd& x) {
  double s = 10.0 * static_cast<double>(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) s += x[i] * x[i] - 10.0 * std::cos(2.0 * kPi * x[i]);
  return -s;
}

double levy(const Eigen::VectorXd& x) {
  const Eigen::Index d = x.size();
  auto w = [&](Eigen::Index i) { return 1.0 + (x[i] - 1.0) / 4.0; };
  double s = std::pow(std::sin(kPi * w(0)), 2);
  for (Eigen::Index i = 0; i + 1 < d; ++i) {
    const double wi = w(i);
    s += (wi - 1.0) * (wi - 1.0) * (1.0 + 10.0 * std::pow(std::sin(kPi * wi + 1.0), 2));
  }
  const double wd = w(d - 1);
  s += (wd - 1.0) * (wd - 1.0) * (1.0 + std::pow(std::sin(2.0 * kPi * wd), 2));
  return -s;
}

double schwefel(const Eigen::VectorXd& x) {
  double s = 418.9829 * static_cast<double>(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) s -= x[i] * std::sin(std::sqrt(std::abs(x[i])));
  return -s;
}

double gramacy(const Eigen::VectorXd& x) { return x[0] * std::exp(-x[0] * x[0] - x[1] * x[1]); }

double rosenbrock(const Eigen::VectorXd& x) {
  double s = 0.0;
  for (Eigen::Index i = 0; i + 1 < x.size(); ++i)
    s += 100.0 * std::pow(x[i + 1] - x[i] * x[i], 2) + std::pow(1.0 - x[i], 2);
  return -s;
}

double hartmann3(const Eigen::VectorXd& x) {
  static constexpr std::array<double, 4> alpha{1.0, 1.2, 3.0, 3.2};
  static constexpr double a[4][3] = {{3.0, 10.0, 30.0}, {0.1, 10.0, 35.0}, {3.0, 10.0, 30.0}, {0.1, 10.0, 35.0}};
  static constexpr double p[4][3] = {{0.3689, 0.1170, 0.2673},
                                     {0.4699, 0.4387, 0.7470},
                                     {0.1091, 0.8732, 0.5547},
                                     {0.0381, 0.5743, 0.8828}};
  double s = 0.0;
  for (int i = 0; i < 4; ++i) {
    double inner = 0.0;
    for (int j = 0; j < 3; ++j) inner += a[i][j] * std::pow(x[j] - p[i][j], 2);
    s += alpha[static_cast<std::size_t>(i)] * std::exp(-inner);
  }
  return s;
}

Box uniform_box(int d, double lo, double hi) {
  return Box{std::vector<double>(static_cast<std::size_t>(d), lo), std::vector<double>(static_cast<std::size_t>(d), hi)};
}

double branin_term(double x1, double x2) {
  return x2 - 5.1 / (4.0 * kPi * kPi) * x1 * x1 + 5.0 / kPi * x1 - 6.0;
}

}  // namespace

const std::vector<std::string>& function_names() {
  static const std::vector<std::string> names{"sphere",   "ackley",     "rastrigin", "levy",
                                              "schwefel", "gramacy",    "rosenbrock", "hartmann3"};
  return names;
}

Box function_domain(std::string_view name, int d) {
  if (d < 1) throw std::invalid_argument("function_domain: dimension must be positive");
  if (name == "sphere" || name == "rastrigin") return uniform_box(d, -5.12, 5.12);
  if (name == "ackley") return uniform_box(d, -5.0, 5.0);
  if (name == "levy") return uniform_box(d, -10.0, 10.0);
  if (name == "schwefel") return uniform_box(d, -500.0, 500.0);
  if (name == "gramacy") {
    if (d != 2) throw std::invalid_argument("gramacy is two-dimensional");
    return uniform_box(2, -2.0, 6.0);
  }
  if (name == "rosenbrock") {
    if (d < 2) throw std::invalid_argument("rosenbrock needs d >= 2");
    return uniform_box(d, -2.048, 2.048);
  }
  if (name == "hartmann3") {
    if (d != 3) throw std::invalid_argument("hartmann3 is three-dimensional");
    return uniform_box(3, 0.0, 1.0);
  }
  throw std::invalid_argument("unknown function: " + std::string(name));
}

double eval_function(std::string_view name, const Eigen::Ref<const Eigen::VectorXd>& xr) {
  const Eigen::VectorXd x = xr;
  const Box box = function_domain(name, static_cast<int>(x.size()));
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const auto k = static_cast<std::size_t>(i);
    const double slack = 1e-9 * (box.hi[k] - box.lo[k]);
    if (x[i] < box.lo[k] - slack || x[i] > box.hi[k] + slack)
      throw std::out_of_range("eval_function: point outside the domain of " + std::string(name));
  }
  if (name == "sphere") return sphere(x);
  if (name == "ackley") return ackley(x);
  if (name == "rastrigin") return rastrigin(x);
  if (name == "levy") return levy(x);
  if (name == "schwefel") return schwefel(x);
  if (name == "gramacy") return gramacy(x);
  if (name == "rosenbrock") return rosenbrock(x);
  return hartmann3(x);
}

double branin_raw(const Eigen::Ref<const Eigen::VectorXd>& x, Fidelity fidelity, double a) {
  if (x.size() != 2) throw std::invalid_argument("branin: expects a 2-D point");
  if (!(a >= 0.0 && a <= 1.0)) throw std::invalid_argument("branin: a must lie in [0, 1]");
  const double x1 = 15.0 * x[0], x2 = 15.0 * x[1];
  const double term = branin_term(x1, x2);
  const double fh = term * term + 10.0 * (1.0 - 1.0 / (8.0 * kPi)) * std::cos(x1) + 10.0;
  return fidelity == Fidelity::High ? fh : fh - (a + 0.5) * term * term;
}

double branin_mf(const Eigen::Ref<const Eigen::VectorXd>& x, Fidelity fidelity, double a) {
  return -branin_raw(x, fidelity, a);
}

ReactorOutput reactor_rates(double tau, double k1, double k2, double a0) {
  if (tau < 0.0) throw std::invalid_argument("reactor: negative residence time");
  const double conversion = 1.0 - std::exp(-k1 * tau);
  double yield;
  const double diff = k2 - k1;
  if (std::abs(diff) <= 1e-9 * std::max(std::abs(k1), std::abs(k2))) {
    yield = a0 * k1 * tau * std::exp(-k1 * tau);
  } else {
    yield = a0 * k1 / diff * (std::exp(-k1 * tau) - std::exp(-k2 * tau));
  }
  return {yield, conversion};
}

ReactorOutput reactor(double tau, double temp_kelvin, const ReactorParams& p) {
  if (!(temp_kelvin > 0.0)) throw std::invalid_argument("reactor: temperature must be positive");
  const double k1 = p.a1 * std::exp(-p.ea1 / (p.gas_constant * temp_kelvin));
  const double k2 = p.a2 * std::exp(-p.ea2 / (p.gas_constant * temp_kelvin));
  return reactor_rates(tau, k1, k2, p.a0);
}

Eigen::VectorXd to_domain(const Eigen::Ref<const Eigen::VectorXd>& z, const Box& box, double scale) {
  if (static_cast<std::size_t>(z.size()) != box.lo.size()) throw std::invalid_argument("to_domain: dimension mismatch");
  Eigen::VectorXd x(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const auto k = static_cast<std::size_t>(i);
    x[i] = box.lo[k] + (z[i] + scale) / (2.0 * scale) * (box.hi[k] - box.lo[k]);
  }
  return x;
}

}  // namespace ficbo::bench
