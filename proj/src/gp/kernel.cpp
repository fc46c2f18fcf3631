#include "ficbo/gp/kernel.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace ficbo::gp {

std::string_view to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::Matern12: return "matern12";
    case KernelFamily::Matern32: return "matern32";
    case KernelFamily::Matern52: return "matern52";
    case KernelFamily::Rbf: return "rbf";
  }
  return "unknown";
}

KernelFamily kernel_family_from_string(std::string_view name) {
  if (name == "matern12") return KernelFamily::Matern12;
  if (name == "matern32") return KernelFamily::Matern32;
  if (name == "matern52") return KernelFamily::Matern52;
  if (name == "rbf") return KernelFamily::Rbf;
  throw std::invalid_argument("unknown kernel family: " + std::string(name));
}

void KernelSpec::validate() const {
  if (lengthscales.size() < 1) throw std::invalid_argument("KernelSpec: no lengthscales");
  if (!(output_scale > 0.0)) throw std::invalid_argument("KernelSpec: output_scale must be positive");
  for (Eigen::Index i = 0; i < lengthscales.size(); ++i) {
    if (!(lengthscales[i] > 0.0)) throw std::invalid_argument("KernelSpec: lengthscales must be positive");
    if (isotropic && lengthscales[i] != lengthscales[0]) {
      throw std::invalid_argument("KernelSpec: isotropic spec with unequal lengthscales");
    }
  }
}

KernelSpec KernelSpec::isotropic_spec(KernelFamily family, Eigen::Index dim, double lengthscale, double output_scale) {
  KernelSpec s;
  s.family = family;
  s.lengthscales = Eigen::VectorXd::Constant(dim, lengthscale);
  s.output_scale = output_scale;
  s.isotropic = true;
  s.validate();
  return s;
}

double correlation(KernelFamily family, double r) {
  switch (family) {
    case KernelFamily::Matern12: return std::exp(-r);
    case KernelFamily::Matern32: {
      const double s = std::sqrt(3.0) * r;
      return (1.0 + s) * std::exp(-s);
    }
    case KernelFamily::Matern52: {
      const double s = std::sqrt(5.0) * r;
      return (1.0 + s + s * s / 3.0) * std::exp(-s);
    }
    case KernelFamily::Rbf: return std::exp(-0.5 * r * r);
  }
  return 0.0;
}

KernelSpec sample_kernel_spec(Rng& rng, Eigen::Index dim, bool isotropic) {
  if (dim < 1) throw std::invalid_argument("sample_kernel_spec: dimension must be >= 1");
  static constexpr std::array families{KernelFamily::Matern12, KernelFamily::Matern32, KernelFamily::Matern52,
                                       KernelFamily::Rbf};
  KernelSpec s;
  s.family = families[rng.index(families.size())];
  const double root_d = std::sqrt(static_cast<double>(dim));
  const double lo = 0.1 * root_d;
  const double hi = 2.0 * root_d;
  s.isotropic = isotropic;
  s.lengthscales.resize(dim);
  if (isotropic) {
    s.lengthscales.setConstant(rng.uniform(lo, hi));
  } else {
    for (Eigen::Index i = 0; i < dim; ++i) s.lengthscales[i] = rng.uniform(lo, hi);
  }
  s.output_scale = rng.uniform(0.1, 1.0);
  return s;
}

KernelSpec sample_kernel_spec(Rng& rng, Eigen::Index dim) {
  const bool iso = rng.bernoulli(0.5);
  return sample_kernel_spec(rng, dim, iso);
}

namespace {

double scaled_distance(const KernelSpec& spec, const double* a, const double* b, Eigen::Index d) {
  double r2 = 0.0;
  for (Eigen::Index i = 0; i < d; ++i) {
    const double z = (a[i] - b[i]) / spec.lengthscales[i];
    r2 += z * z;
  }
  return std::sqrt(r2);
}

}  // namespace

double kernel_eval(const KernelSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& a,
                   const Eigen::Ref<const Eigen::VectorXd>& b) {
  if (a.size() != spec.dim() || b.size() != spec.dim()) {
    throw std::invalid_argument("kernel_eval: dimension mismatch");
  }
  Eigen::VectorXd aa = a, bb = b;
  return spec.output_scale * correlation(spec.family, scaled_distance(spec, aa.data(), bb.data(), spec.dim()));
}

Eigen::MatrixXd kernel_matrix(const KernelSpec& spec, const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.cols() != spec.dim() || b.cols() != spec.dim()) {
    throw std::invalid_argument("kernel_matrix: dimension mismatch");
  }
  const Eigen::Index d = spec.dim();
  // Row-major copies so each point is contiguous.
  using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const RowMat ra = a, rb = b;
  Eigen::MatrixXd k(a.rows(), b.rows());
  for (Eigen::Index j = 0; j < b.rows(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      k(i, j) = spec.output_scale * correlation(spec.family, scaled_distance(spec, ra.row(i).data(), rb.row(j).data(), d));
    }
  }
  return k;
}

Eigen::MatrixXd kernel_matrix(const KernelSpec& spec, const Eigen::MatrixXd& points) {
  if (points.cols() != spec.dim()) throw std::invalid_argument("kernel_matrix: dimension mismatch");
  const Eigen::Index n = points.rows();
  const Eigen::Index d = spec.dim();
  using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const RowMat rp = points;
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    k(j, j) = spec.output_scale;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const double v = spec.output_scale * correlation(spec.family, scaled_distance(spec, rp.row(i).data(), rp.row(j).data(), d));
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

}  // namespace ficbo::gp
