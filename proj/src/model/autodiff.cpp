#include "ficbo/model/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "ficbo/simd/kernels.hpp"

namespace ficbo::nn {

namespace {

const simd::Kernels& K() { return simd::active(); }

void check_same_shape(std::size_t r0, std::size_t c0, std::size_t r1, std::size_t c1, const char* op) {
  if (r0 != r1 || c0 != c1) throw std::invalid_argument(std::string(op) + ": shape mismatch");
}

}  // namespace

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

std::size_t Graph::idx(Var v) const {
  if (v < 0 || static_cast<std::size_t>(v) >= nodes_.size()) throw std::out_of_range("Graph: invalid variable");
  return static_cast<std::size_t>(v);
}

Var Graph::push(std::size_t rows, std::size_t cols, std::vector<double> val) {
  Node n;
  n.rows = rows;
  n.cols = cols;
  n.val = std::move(val);
  nodes_.push_back(std::move(n));
  return static_cast<Var>(nodes_.size() - 1);
}

Var Graph::constant(std::size_t rows, std::size_t cols, std::vector<double> data) {
  if (data.size() != rows * cols) throw std::invalid_argument("constant: data size mismatch");
  return push(rows, cols, std::move(data));
}

Var Graph::linear(Var x, Parameter& w, Parameter& b) {
  const std::size_t xi = idx(x);
  const std::size_t n = nodes_[xi].rows, k = nodes_[xi].cols, m = w.cols;
  if (w.rows != k || b.cols != m || b.rows != 1) throw std::invalid_argument("linear: shape mismatch for " + w.name);
  std::vector<double> y(n * m);
  for (std::size_t i = 0; i < n; ++i) std::copy(b.value.begin(), b.value.end(), y.begin() + static_cast<std::ptrdiff_t>(i * m));
  K().gemm_nn(n, k, m, nodes_[xi].val.data(), w.value.data(), y.data());
  const Var out = push(n, m, std::move(y));
  if (record_) {
    nodes_.back().back = [xi, n, k, m, pw = &w, pb = &b](Graph& g, std::size_t self) {
      const std::vector<double>& dy = g.nodes_[self].grad;
      K().gemm_nt(n, m, k, dy.data(), pw->value.data(), g.nodes_[xi].grad.data());
      K().gemm_tn(k, n, m, g.nodes_[xi].val.data(), dy.data(), pw->grad.data());
      for (std::size_t i = 0; i < n; ++i) K().axpy(1.0, dy.data() + i * m, pb->grad.data(), m);
    };
  }
  return out;
}

Var Graph::relu(Var x) {
  const std::size_t xi = idx(x);
  std::vector<double> y = nodes_[xi].val;
  for (double& v : y) v = v > 0.0 ? v : 0.0;
  const Var out = push(nodes_[xi].rows, nodes_[xi].cols, std::move(y));
  if (record_) {
    nodes_.back().back = [xi](Graph& g, std::size_t self) {
      const auto& dy = g.nodes_[self].grad;
      const auto& xv = g.nodes_[xi].val;
      auto& dx = g.nodes_[xi].grad;
      for (std::size_t i = 0; i < dy.size(); ++i)
        if (xv[i] > 0.0) dx[i] += dy[i];
    };
  }
  return out;
}

Var Graph::add(Var a, Var b) {
  const std::size_t ai = idx(a), bi = idx(b);
  check_same_shape(nodes_[ai].rows, nodes_[ai].cols, nodes_[bi].rows, nodes_[bi].cols, "add");
  std::vector<double> y = nodes_[ai].val;
  K().axpy(1.0, nodes_[bi].val.data(), y.data(), y.size());
  const Var out = push(nodes_[ai].rows, nodes_[ai].cols, std::move(y));
  if (record_) {
    nodes_.back().back = [ai, bi](Graph& g, std::size_t self) {
      const auto& dy = g.nodes_[self].grad;
      K().axpy(1.0, dy.data(), g.nodes_[ai].grad.data(), dy.size());
      K().axpy(1.0, dy.data(), g.nodes_[bi].grad.data(), dy.size());
    };
  }
  return out;
}

Var Graph::add_prefix_rows(Var a, Var b) {
  const std::size_t ai = idx(a), bi = idx(b);
  if (nodes_[bi].cols != nodes_[ai].cols || nodes_[bi].rows > nodes_[ai].rows)
    throw std::invalid_argument("add_prefix_rows: shape mismatch");
  std::vector<double> y = nodes_[ai].val;
  const std::size_t nb = nodes_[bi].val.size();
  K().axpy(1.0, nodes_[bi].val.data(), y.data(), nb);
  const Var out = push(nodes_[ai].rows, nodes_[ai].cols, std::move(y));
  if (record_) {
    nodes_.back().back = [ai, bi, nb](Graph& g, std::size_t self) {
      const auto& dy = g.nodes_[self].grad;
      K().axpy(1.0, dy.data(), g.nodes_[ai].grad.data(), dy.size());
      K().axpy(1.0, dy.data(), g.nodes_[bi].grad.data(), nb);
    };
  }
  return out;
}

Var Graph::concat_cols(Var a, Var b) {
  const std::size_t ai = idx(a), bi = idx(b);
  const std::size_t n = nodes_[ai].rows, ca = nodes_[ai].cols, cb = nodes_[bi].cols;
  if (nodes_[bi].rows != n) throw std::invalid_argument("concat_cols: row mismatch");
  std::vector<double> y(n * (ca + cb));
  for (std::size_t i = 0; i < n; ++i) {
    std::copy_n(nodes_[ai].val.data() + i * ca, ca, y.data() + i * (ca + cb));
    std::copy_n(nodes_[bi].val.data() + i * cb, cb, y.data() + i * (ca + cb) + ca);
  }
  const Var out = push(n, ca + cb, std::move(y));
  if (record_) {
    nodes_.back().back = [ai, bi, n, ca, cb](Graph& g, std::size_t self) {
      const auto& dy = g.nodes_[self].grad;
      for (std::size_t i = 0; i < n; ++i) {
        K().axpy(1.0, dy.data() + i * (ca + cb), g.nodes_[ai].grad.data() + i * ca, ca);
        K().axpy(1.0, dy.data() + i * (ca + cb) + ca, g.nodes_[bi].grad.data() + i * cb, cb);
      }
    };
  }
  return out;
}

Var Graph::slice_rows(Var x, std::size_t begin, std::size_t count) {
  const std::size_t xi = idx(x);
  const std::size_t c = nodes_[xi].cols;
  if (begin + count > nodes_[xi].rows) throw std::invalid_argument("slice_rows: out of range");
  const auto first = nodes_[xi].val.begin() + static_cast<std::ptrdiff_t>(begin * c);
  std::vector<double> y(first, first + static_cast<std::ptrdiff_t>(count * c));
  const Var out = push(count, c, std::move(y));
  if (record_) {
    nodes_.back().back = [xi, begin, c](Graph& g, std::size_t self) {
      const auto& dy = g.nodes_[self].grad;
      K().axpy(1.0, dy.data(), g.nodes_[xi].grad.data() + begin * c, dy.size());
    };
  }
  return out;
}

Var Graph::layer_norm(Var x, Parameter& gamma, Parameter& beta, double eps) {
  const std::size_t xi = idx(x);
  const std::size_t n = nodes_[xi].rows, d = nodes_[xi].cols;
  if (gamma.size() != d || beta.size() != d) throw std::invalid_argument("layer_norm: shape mismatch");
  std::vector<double> xhat(n * d), inv_std(n), y(n * d);
  const double* xv = nodes_[xi].val.data();
  for (std::size_t i = 0; i < n; ++i) {
    double mean = 0.0;
    for (std::size_t j = 0; j < d; ++j) mean += xv[i * d + j];
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t j = 0; j < d; ++j) var += (xv[i * d + j] - mean) * (xv[i * d + j] - mean);
    var /= static_cast<double>(d);
    inv_std[i] = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < d; ++j) {
      xhat[i * d + j] = (xv[i * d + j] - mean) * inv_std[i];
      y[i * d + j] = gamma.value[j] * xhat[i * d + j] + beta.value[j];
    }
  }
  const Var out = push(n, d, std::move(y));
  if (record_) {
    nodes_.back().back = [xi, n, d, pg = &gamma, pb = &beta, xhat = std::move(xhat),
                          inv_std = std::move(inv_std)](Graph& g, std::size_t self) {
      const auto& dy = g.nodes_[self].grad;
      auto& dx = g.nodes_[xi].grad;
      std::vector<double> dxh(d);
      for (std::size_t i = 0; i < n; ++i) {
        double mean_dxh = 0.0, mean_dxh_xh = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
          const double gy = dy[i * d + j];
          pg->grad[j] += gy * xhat[i * d + j];
          pb->grad[j] += gy;
          dxh[j] = gy * pg->value[j];
          mean_dxh += dxh[j];
          mean_dxh_xh += dxh[j] * xhat[i * d + j];
        }
        mean_dxh /= static_cast<double>(d);
        mean_dxh_xh /= static_cast<double>(d);
        for (std::size_t j = 0; j < d; ++j)
          dx[i * d + j] += inv_std[i] * (dxh[j] - mean_dxh - xhat[i * d + j] * mean_dxh_xh);
      }
    };
  }
  return out;
}

Var Graph::attention(Var qkv, std::size_t n_keys, std::size_t n_heads) {
  const std::size_t qi = idx(qkv);
  const std::size_t n = nodes_[qi].rows, w3 = nodes_[qi].cols;
  if (w3 % 3 != 0) throw std::invalid_argument("attention: qkv width must be a multiple of 3");
  const std::size_t d = w3 / 3;
  if (n_heads == 0 || d % n_heads != 0) throw std::invalid_argument("attention: width not divisible by heads");
  if (n_keys == 0 || n_keys > n) throw std::invalid_argument("attention: bad key count");
  const std::size_t dh = d / n_heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  const double* src = nodes_[qi].val.data();

  // Per head: contiguous Q (n x dh), K and V (n_keys x dh), probabilities (n x n_keys).
  std::vector<double> qh(n_heads * n * dh), kh(n_heads * n_keys * dh), vh(n_heads * n_keys * dh);
  for (std::size_t h = 0; h < n_heads; ++h) {
    for (std::size_t i = 0; i < n; ++i)
      std::copy_n(src + i * w3 + h * dh, dh, qh.data() + (h * n + i) * dh);
    for (std::size_t i = 0; i < n_keys; ++i) {
      std::copy_n(src + i * w3 + d + h * dh, dh, kh.data() + (h * n_keys + i) * dh);
      std::copy_n(src + i * w3 + 2 * d + h * dh, dh, vh.data() + (h * n_keys + i) * dh);
    }
  }
  std::vector<double> probs(n_heads * n * n_keys, 0.0);
  std::vector<double> y(n * d, 0.0);
  std::vector<double> oh(n * dh);
  for (std::size_t h = 0; h < n_heads; ++h) {
    double* p = probs.data() + h * n * n_keys;
    K().gemm_nt(n, dh, n_keys, qh.data() + h * n * dh, kh.data() + h * n_keys * dh, p);
    for (std::size_t i = 0; i < n; ++i) {
      double* row = p + i * n_keys;
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < n_keys; ++j) {
        row[j] *= scale;
        mx = std::max(mx, row[j]);
      }
      double s = 0.0;
      for (std::size_t j = 0; j < n_keys; ++j) {
        row[j] = std::exp(row[j] - mx);
        s += row[j];
      }
      for (std::size_t j = 0; j < n_keys; ++j) row[j] /= s;
    }
    std::fill(oh.begin(), oh.end(), 0.0);
    K().gemm_nn(n, n_keys, dh, p, vh.data() + h * n_keys * dh, oh.data());
    for (std::size_t i = 0; i < n; ++i) std::copy_n(oh.data() + i * dh, dh, y.data() + i * d + h * dh);
  }
  const Var out = push(n, d, std::move(y));
  if (record_) {
    nodes_.back().back = [qi, n, n_keys, n_heads, d, dh, scale, qh = std::move(qh), kh = std::move(kh),
                          vh = std::move(vh), probs = std::move(probs)](Graph& g, std::size_t self) {
      const auto& dy = g.nodes_[self].grad;
      auto& dsrc = g.nodes_[qi].grad;
      const std::size_t w3 = 3 * d;
      std::vector<double> doh(n * dh), dp(n * n_keys), dq(n * dh), dk(n_keys * dh), dv(n_keys * dh);
      for (std::size_t h = 0; h < n_heads; ++h) {
        const double* p = probs.data() + h * n * n_keys;
        for (std::size_t i = 0; i < n; ++i) std::copy_n(dy.data() + i * d + h * dh, dh, doh.data() + i * dh);
        std::fill(dp.begin(), dp.end(), 0.0);
        std::fill(dq.begin(), dq.end(), 0.0);
        std::fill(dk.begin(), dk.end(), 0.0);
        std::fill(dv.begin(), dv.end(), 0.0);
        K().gemm_nt(n, dh, n_keys, doh.data(), vh.data() + h * n_keys * dh, dp.data());
        K().gemm_tn(n_keys, n, dh, p, doh.data(), dv.data());
        for (std::size_t i = 0; i < n; ++i) {
          const double* prow = p + i * n_keys;
          double* drow = dp.data() + i * n_keys;
          const double inner = K().dot(prow, drow, n_keys);
          for (std::size_t j = 0; j < n_keys; ++j) drow[j] = prow[j] * (drow[j] - inner) * scale;
        }
        K().gemm_nn(n, n_keys, dh, dp.data(), kh.data() + h * n_keys * dh, dq.data());
        K().gemm_tn(n_keys, n, dh, dp.data(), qh.data() + h * n * dh, dk.data());
        for (std::size_t i = 0; i < n; ++i) K().axpy(1.0, dq.data() + i * dh, dsrc.data() + i * w3 + h * dh, dh);
        for (std::size_t i = 0; i < n_keys; ++i) {
          K().axpy(1.0, dk.data() + i * dh, dsrc.data() + i * w3 + d + h * dh, dh);
          K().axpy(1.0, dv.data() + i * dh, dsrc.data() + i * w3 + 2 * d + h * dh, dh);
        }
      }
    };
  }
  return out;
}

Var Graph::log_softmax(Var logits) {
  const std::size_t li = idx(logits);
  if (nodes_[li].cols != 1 || nodes_[li].rows == 0) throw std::invalid_argument("log_softmax: expected a non-empty column");
  const auto& z = nodes_[li].val;
  const double mx = *std::max_element(z.begin(), z.end());
  double s = 0.0;
  for (double v : z) s += std::exp(v - mx);
  const double lse = mx + std::log(s);
  std::vector<double> y(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) y[i] = z[i] - lse;
  const Var out = push(z.size(), 1, std::move(y));
  if (record_) {
    nodes_.back().back = [li](Graph& g, std::size_t self) {
      const auto& dy = g.nodes_[self].grad;
      const auto& ly = g.nodes_[self].val;
      double total = 0.0;
      for (double v : dy) total += v;
      auto& dz = g.nodes_[li].grad;
      for (std::size_t i = 0; i < dy.size(); ++i) dz[i] += dy[i] - std::exp(ly[i]) * total;
    };
  }
  return out;
}

Var Graph::pick(Var x, std::size_t row, std::size_t col) {
  const std::size_t xi = idx(x);
  if (row >= nodes_[xi].rows || col >= nodes_[xi].cols) throw std::out_of_range("pick: index out of range");
  const std::size_t flat = row * nodes_[xi].cols + col;
  const Var out = push(1, 1, {nodes_[xi].val[flat]});
  if (record_) {
    nodes_.back().back = [xi, flat](Graph& g, std::size_t self) { g.nodes_[xi].grad[flat] += g.nodes_[self].grad[0]; };
  }
  return out;
}

Var Graph::gmm_nll(Var head, std::vector<double> y, std::size_t k, double std_floor) {
  const std::size_t hi = idx(head);
  const std::size_t n = nodes_[hi].rows;
  if (nodes_[hi].cols != 3 * k || y.size() != n || n == 0) throw std::invalid_argument("gmm_nll: shape mismatch");
  const double half_log_2pi = 0.5 * std::log(2.0 * std::numbers::pi);
  const double* hv = nodes_[hi].val.data();
  // Per row and component: responsibility and the log mixture weight.
  std::vector<double> resp(n * k), weight(n * k);
  double total = 0.0;
  std::vector<double> lw(k), lj(k);
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = hv + i * 3 * k;
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) mx = std::max(mx, row[c]);
    double s = 0.0;
    for (std::size_t c = 0; c < k; ++c) s += std::exp(row[c] - mx);
    const double lse_w = mx + std::log(s);
    double mj = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) {
      lw[c] = row[c] - lse_w;
      const double sigma = softplus(row[2 * k + c]) + std_floor;
      const double z = (y[i] - row[k + c]) / sigma;
      lj[c] = lw[c] - half_log_2pi - std::log(sigma) - 0.5 * z * z;
      mj = std::max(mj, lj[c]);
    }
    double sj = 0.0;
    for (std::size_t c = 0; c < k; ++c) sj += std::exp(lj[c] - mj);
    const double ll = mj + std::log(sj);
    total -= ll;
    for (std::size_t c = 0; c < k; ++c) {
      resp[i * k + c] = std::exp(lj[c] - ll);
      weight[i * k + c] = std::exp(lw[c]);
    }
  }
  const Var out = push(1, 1, {total / static_cast<double>(n)});
  if (record_) {
    nodes_.back().back = [hi, n, k, std_floor, y = std::move(y), resp = std::move(resp),
                          weight = std::move(weight)](Graph& g, std::size_t self) {
      const double coef = -g.nodes_[self].grad[0] / static_cast<double>(n);
      const double* hv = g.nodes_[hi].val.data();
      double* dh = g.nodes_[hi].grad.data();
      for (std::size_t i = 0; i < n; ++i) {
        const double* row = hv + i * 3 * k;
        double* drow = dh + i * 3 * k;
        for (std::size_t c = 0; c < k; ++c) {
          const double r = resp[i * k + c];
          const double sraw = row[2 * k + c];
          const double sigma = softplus(sraw) + std_floor;
          const double diff = y[i] - row[k + c];
          drow[c] += coef * (r - weight[i * k + c]);
          drow[k + c] += coef * r * diff / (sigma * sigma);
          drow[2 * k + c] += coef * r * (diff * diff / (sigma * sigma * sigma) - 1.0 / sigma) * sigmoid(sraw);
        }
      }
    };
  }
  return out;
}

void Graph::backward(std::span<const std::pair<Var, double>> seeds) {
  if (!record_) throw std::logic_error("backward on a graph built without recording");
  for (Node& n : nodes_) n.grad.assign(n.val.size(), 0.0);
  std::size_t last = 0;
  for (const auto& [v, coef] : seeds) {
    const std::size_t i = idx(v);
    if (nodes_[i].val.size() != 1) throw std::invalid_argument("backward: seeds must be scalars");
    nodes_[i].grad[0] += coef;
    last = std::max(last, i);
  }
  for (std::size_t i = last + 1; i-- > 0;) {
    if (nodes_[i].back) nodes_[i].back(*this, i);
  }
  for (Node& n : nodes_) std::vector<double>().swap(n.grad);
}

}  // namespace ficbo::nn
