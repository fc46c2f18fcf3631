#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace ficbo {

// Seeded random stream. The engine is std::mt19937_64 (fully specified by the
// standard); every distribution is implemented here so that streams are
// reproducible across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0);

  // Independent child stream keyed by a tag. Does not advance this stream.
  [[nodiscard]] Rng derive(std::uint64_t tag) const;
  [[nodiscard]] Rng derive(std::string_view tag) const;

  std::uint64_t next_u64() { return engine_(); }
  [[nodiscard]] std::uint64_t seed() const { return seed_; }

  // [0, 1)
  double uniform();
  double uniform(double lo, double hi);
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }
  // Uniform integer in [lo, hi], inclusive.
  std::int64_t integer(std::int64_t lo, std::int64_t hi);
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(integer(0, static_cast<std::int64_t>(n) - 1)); }
  bool bernoulli(double p) { return uniform() < p; }
  // Marsaglia-Tsang; shapes below one use the u^(1/a) boost.
  double gamma(double shape);
  std::vector<double> dirichlet(double alpha, std::size_t k);

  template <typename T>
  const T& choice(std::span<const T> items) {
    return items[index(items.size())];
  }

  // k distinct indices from [0, n), in draw order.
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t hash_tag(std::string_view tag);

}  // namespace ficbo
