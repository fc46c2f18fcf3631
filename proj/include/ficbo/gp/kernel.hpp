#pragma once

#include <Eigen/Dense>
#include <string>
#include <string_view>
#include <vector>

#include "ficbo/util/rng.hpp"

namespace ficbo::gp {

// Matern smoothness. Rbf is the nu -> infinity member.
enum class KernelFamily { Matern12, Matern32, Matern52, Rbf };

std::string_view to_string(KernelFamily family);
KernelFamily kernel_family_from_string(std::string_view name);

// Stationary ARD kernel. Distances are divided per-dimension by the
// lengthscale before taking the Euclidean norm; an isotropic spec simply holds
// equal entries. output_scale is the prior variance k(x, x).
struct KernelSpec {
  KernelFamily family = KernelFamily::Rbf;
  Eigen::VectorXd lengthscales = Eigen::VectorXd::Ones(1);
  double output_scale = 1.0;
  bool isotropic = true;

  [[nodiscard]] Eigen::Index dim() const { return lengthscales.size(); }

  // Throws std::invalid_argument when an invariant is violated.
  void validate() const;

  static KernelSpec isotropic_spec(KernelFamily family, Eigen::Index dim, double lengthscale, double output_scale);
};

// Matern correlation as a function of the scaled distance r >= 0.
double correlation(KernelFamily family, double r);

// Family uniform over the four members, lengthscales ~ U(0.1 sqrt(d), 2.0 sqrt(d)),
// output_scale ~ U(0.1, 1.0), isotropic with probability 0.5.
KernelSpec sample_kernel_spec(Rng& rng, Eigen::Index dim);

// Same, with the isotropic switch pinned.
KernelSpec sample_kernel_spec(Rng& rng, Eigen::Index dim, bool isotropic);

double kernel_eval(const KernelSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& a,
                   const Eigen::Ref<const Eigen::VectorXd>& b);

// Rows of `a` against rows of `b`.
Eigen::MatrixXd kernel_matrix(const KernelSpec& spec, const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);
Eigen::MatrixXd kernel_matrix(const KernelSpec& spec, const Eigen::MatrixXd& points);

}  // namespace ficbo::gp
