#pragma once

// Closed-form test functions in maximization form, evaluated in their natural
// domains.

#include <Eigen/Dense>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ficbo::bench {

struct Box {
  std::vector<double> lo;
  std::vector<double> hi;
};

// Natural domain of a named function in dimension d. Throws for unknown names
// or unsupported dimensions.
Box function_domain(std::string_view name, int d);

// Maximization-form value at a point of the natural domain.
double eval_function(std::string_view name, const Eigen::Ref<const Eigen::VectorXd>& x);

const std::vector<std::string>& function_names();

enum class Fidelity { High, Low };

// Branin on [0,1]^2 with x' = 15 x, in its minimization form. The low-fidelity
// variant subtracts (a + 0.5) times the squared term.
double branin_raw(const Eigen::Ref<const Eigen::VectorXd>& x, Fidelity fidelity, double a);
// Negated, so larger is better.
double branin_mf(const Eigen::Ref<const Eigen::VectorXd>& x, Fidelity fidelity, double a);

struct ReactorParams {
  double a1 = 1e6;
  double a2 = 1e7;
  double ea1 = 50e3;   // J/mol
  double ea2 = 60e3;
  double a0 = 1.0;
  double gas_constant = 8.314;
  double tau_lo = 0.1;
  double tau_hi = 10.0;
  double temp_lo = 300.0;
  double temp_hi = 400.0;
};

struct ReactorOutput {
  double yield_b;
  double conversion;
};

// A -> B -> C with Arrhenius first-order rates.
ReactorOutput reactor(double tau, double temp_kelvin, const ReactorParams& p = {});
// Same closed form with the rates given directly.
ReactorOutput reactor_rates(double tau, double k1, double k2, double a0);

// Maps [-scale, scale]^d onto the box.
Eigen::VectorXd to_domain(const Eigen::Ref<const Eigen::VectorXd>& z, const Box& box, double scale = 5.0);

}  // namespace ficbo::bench
