#include "ficbo/harness/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ficbo/util/rng.hpp"

namespace ficbo::harness {

namespace {

std::vector<std::size_t> top_k(std::span<const double> v, const std::vector<std::size_t>& idx, std::size_t k) {
  std::vector<std::size_t> order = idx;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] > v[b]; });
  order.resize(k);
  std::sort(order.begin(), order.end());
  return order;
}

double quantile_sorted(const std::vector<double>& s, double q) {
  // Linear interpolation between order statistics.
  const double pos = q * static_cast<double>(s.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, s.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return s[lo] + frac * (s[hi] - s[lo]);
}

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> rank(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j);
    for (std::size_t k = i; k <= j; ++k) rank[order[k]] = r;
    i = j + 1;
  }
  return rank;
}

}  // namespace

double spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) throw std::invalid_argument("spearman: need two aligned samples");
  const auto ra = average_ranks(a), rb = average_ranks(b);
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n, mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

RegretReference regret_reference(const prior::TaskInstance& task) {
  std::vector<bool> is_context(static_cast<std::size_t>(task.pool_rows()), false);
  for (std::size_t c : task.context_init) is_context[c] = true;
  double mx = -INFINITY, mn = INFINITY;
  for (Eigen::Index i = 0; i < task.pool_y.size(); ++i) {
    if (is_context[static_cast<std::size_t>(i)]) continue;
    mx = std::max(mx, task.pool_y[i]);
    mn = std::min(mn, task.pool_y[i]);
  }
  if (!std::isfinite(mx)) throw std::invalid_argument("regret_reference: no candidates");
  const double range = mx - mn;
  return {mx, range > 0.0 ? range : 1.0};
}

std::vector<double> cumulative_regret(std::span<const double> ys, double pool_max, double normalizer) {
  if (!(normalizer > 0.0)) normalizer = 1.0;
  std::vector<double> out(ys.size());
  double acc = 0.0;
  for (std::size_t t = 0; t < ys.size(); ++t) {
    acc += (pool_max - ys[t]) / normalizer;
    out[t] = acc;
  }
  return out;
}

double agreement_at_k(std::span<const double> scores, std::span<const double> feedback, const std::vector<bool>& mask,
                      std::size_t k) {
  if (scores.size() != feedback.size() || mask.size() != scores.size())
    throw std::invalid_argument("agreement_at_k: length mismatch");
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i]) idx.push_back(i);
  if (idx.empty()) throw std::invalid_argument("agreement_at_k: empty pool");
  k = std::min(k, idx.size());
  const auto a = top_k(scores, idx, k);
  const auto b = top_k(feedback, idx, k);
  std::vector<std::size_t> common;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(common));
  return static_cast<double>(common.size()) / static_cast<double>(k);
}

std::vector<double> feedback_profile(std::span<const double> y, std::span<const double> u, std::size_t bins) {
  if (y.size() != u.size()) throw std::invalid_argument("feedback_profile: length mismatch");
  if (y.empty()) throw std::invalid_argument("feedback_profile: no points");
  const std::size_t n = y.size();
  bins = std::min(bins, n);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return u[a] < u[b]; });
  std::vector<double> out(2 * bins, 0.0);
  for (std::size_t b = 0; b < bins; ++b) {
    // Bin b covers sorted positions [b*n/B, (b+1)*n/B).
    const std::size_t lo = b * n / bins, hi = (b + 1) * n / bins;
    double s = 0.0, a = 0.0;
    for (std::size_t p = lo; p < hi; ++p) {
      const double d = u[order[p]] - y[order[p]];
      s += d;
      a += std::abs(d);
    }
    const auto cnt = static_cast<double>(hi - lo);
    out[b] = s / cnt;
    out[bins + b] = a / cnt;
  }
  return out;
}

BootstrapCi bootstrap_mean_ci(std::span<const double> values, int resamples, std::uint64_t seed, double level) {
  if (values.empty()) throw std::invalid_argument("bootstrap: no values");
  if (resamples < 1 || !(level > 0.0 && level < 1.0)) throw std::invalid_argument("bootstrap: bad settings");
  const std::size_t n = values.size();
  BootstrapCi ci;
  ci.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);
  Rng rng(seed);
  std::vector<double> means(static_cast<std::size_t>(resamples));
  for (auto& m : means) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += values[rng.index(n)];
    m = s / static_cast<double>(n);
  }
  std::sort(means.begin(), means.end());
  const double alpha = (1.0 - level) / 2.0;
  ci.lo = quantile_sorted(means, alpha);
  ci.hi = quantile_sorted(means, 1.0 - alpha);
  return ci;
}

BootstrapCi paired_bootstrap_ci(std::span<const double> a, std::span<const double> b, int resamples,
                                std::uint64_t seed, double level) {
  if (a.size() != b.size()) throw std::invalid_argument("paired bootstrap: length mismatch");
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return bootstrap_mean_ci(d, resamples, seed, level);
}

}  // namespace ficbo::harness
