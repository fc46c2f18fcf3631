#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ficbo/prior/task.hpp"

namespace ficbo::harness {

struct RegretReference {
  double pool_max = 0.0;
  double normalizer = 1.0;  // pool range, or 1 when the range is zero
};

// Computed over the stored (noisy) objective of the selectable candidates so
// every strategy shares one reference.
RegretReference regret_reference(const prior::TaskInstance& task);

// Running sum of (pool_max - y_t) / normalizer. A nonpositive normalizer is
// replaced by 1.
std::vector<double> cumulative_regret(std::span<const double> ys, double pool_max, double normalizer);

// |top_k(scores) ∩ top_k(feedback)| / k over unmasked entries, k = min(5, count).
// Ties rank the lower index first.
double agreement_at_k(std::span<const double> scores, std::span<const double> feedback, const std::vector<bool>& mask,
                      std::size_t k = 5);

inline double agreement_at_5(std::span<const double> scores, std::span<const double> feedback,
                             const std::vector<bool>& mask) {
  return agreement_at_k(scores, feedback, mask, 5);
}

// Errors u - y sorted by u (stable, then index) and split into `bins`
// equal-size bins; signed bin means followed by absolute bin means. With fewer
// points than bins the bin count drops to the point count.
std::vector<double> feedback_profile(std::span<const double> y, std::span<const double> u, std::size_t bins = 20);

// Rank correlation with average ranks for ties.
double spearman(std::span<const double> a, std::span<const double> b);

struct BootstrapCi {
  double mean = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

// Percentile bootstrap of the mean.
BootstrapCi bootstrap_mean_ci(std::span<const double> values, int resamples = 1000, std::uint64_t seed = 0,
                              double level = 0.95);

// Bootstrap of mean(a - b) over paired samples.
BootstrapCi paired_bootstrap_ci(std::span<const double> a, std::span<const double> b, int resamples = 1000,
                                std::uint64_t seed = 0, double level = 0.95);

}  // namespace ficbo::harness
