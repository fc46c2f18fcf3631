#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "ficbo/harness/config.hpp"
#include "ficbo/harness/experiment.hpp"
#include "ficbo/harness/metrics.hpp"
#include "ficbo/util/rng.hpp"
#include "test_util.hpp"

using namespace ficbo;
using namespace ficbo::harness;
namespace fs = std::filesystem;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.strategies = {"random", "oracle"};
  cfg.benchmark = "ackley";
  cfg.dim = 1;
  cfg.seeds = {0, 1, 2};
  cfg.horizon = 6;
  cfg.pool_size = 40;
  return cfg;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), {}};
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("ficbo_harness_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST(Regret, WorkedExample) {
  const std::vector<double> ys{0.0, 1.0};
  EXPECT_EQ(cumulative_regret(ys, 1.0, 1.0), (std::vector<double>{1.0, 1.0}));
  EXPECT_EQ(cumulative_regret(ys, 1.0, 0.0), (std::vector<double>{1.0, 1.0}));
  const std::vector<double> zs{0.3, -1.0, 0.9, 0.1};
  const auto r = cumulative_regret(zs, 1.0, 2.0);
  EXPECT_TRUE(std::is_sorted(r.begin(), r.end()));
  EXPECT_DOUBLE_EQ(r.back(), (0.7 + 2.0 + 0.1 + 0.9) / 2.0);
}

TEST(Regret, ReferenceSkipsContext) {
  auto t = ficbo::testing::make_task(ficbo::testing::vec({9.0, 1.0, 3.0, 2.0}), ficbo::testing::vec({0, 0, 0, 0}), 2);
  const auto ref = regret_reference(t);
  EXPECT_EQ(ref.pool_max, 3.0);
  EXPECT_EQ(ref.normalizer, 2.0);
  auto flat = ficbo::testing::make_task(ficbo::testing::vec({0.0, 1.0, 1.0}), ficbo::testing::vec({0, 0, 0}), 1);
  EXPECT_EQ(regret_reference(flat).normalizer, 1.0);
}

TEST(Agreement, Examples) {
  std::vector<double> u(20);
  std::iota(u.begin(), u.end(), 0.0);
  const std::vector<bool> all(20, true);
  EXPECT_EQ(agreement_at_5(u, u, all), 1.0);
  std::vector<double> rev(u.rbegin(), u.rend());
  EXPECT_EQ(agreement_at_5(rev, u, all), 0.0);
  // Two of the top five shared.
  std::vector<double> s(20, 0.0);
  for (int i : {19, 18, 0, 1, 2}) s[i] = 10.0 + i;
  EXPECT_DOUBLE_EQ(agreement_at_5(s, u, all), 0.4);
  // Masked entries never count.
  std::vector<bool> mask(20, true);
  for (int i = 15; i < 20; ++i) mask[i] = false;
  EXPECT_EQ(agreement_at_5(u, u, mask), 1.0);
  std::vector<bool> few(20, false);
  few[3] = few[4] = true;
  EXPECT_EQ(agreement_at_5(rev, u, few), 1.0);
}

TEST(Profile, ZeroAndShift) {
  Rng rng(1);
  std::vector<double> y(60), u(60);
  for (auto& v : y) v = rng.normal();
  auto p = feedback_profile(y, y, 20);
  ASSERT_EQ(p.size(), 40u);
  for (double v : p) EXPECT_EQ(v, 0.0);
  for (std::size_t i = 0; i < y.size(); ++i) u[i] = y[i] - 0.5;
  p = feedback_profile(y, u, 20);
  for (std::size_t b = 0; b < 20; ++b) {
    EXPECT_NEAR(p[b], -0.5, 1e-12);
    EXPECT_NEAR(p[20 + b], 0.5, 1e-12);
  }
  EXPECT_EQ(feedback_profile(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2, 3}, 20).size(), 6u);
}

TEST(Profile, MatchesBruteForceBinning) {
  Rng rng(2);
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t n = 20 + rng.index(200);
    std::vector<double> y(n), u(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = rng.normal();
      u[i] = std::round(4.0 * rng.normal()) / 4.0;  // ties on purpose
    }
    // Rank by (u, index); bin b takes ranks with floor(rank * 20 / n) == b.
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return u[a] != u[b] ? u[a] < u[b] : a < b; });
    std::vector<double> sum(20, 0.0), asum(20, 0.0), cnt(20, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
      std::size_t b = 0;
      while ((b + 1) * n / 20 <= r) ++b;
      const double e = u[idx[r]] - y[idx[r]];
      sum[b] += e;
      asum[b] += std::abs(e);
      cnt[b] += 1.0;
    }
    const auto p = feedback_profile(y, u, 20);
    for (std::size_t b = 0; b < 20; ++b) {
      ASSERT_NEAR(p[b], sum[b] / cnt[b], 1e-12) << rep;
      ASSERT_NEAR(p[20 + b], asum[b] / cnt[b], 1e-12) << rep;
    }
  }
}

TEST(Spearman, Basics) {
  const std::vector<double> a{1, 2, 3, 4}, b{10, 20, 30, 40}, c{4, 3, 2, 1};
  EXPECT_NEAR(spearman(a, b), 1.0, 1e-12);
  EXPECT_NEAR(spearman(a, c), -1.0, 1e-12);
  const std::vector<double> x{1, 2, 2, 3}, y{1, 3, 2, 4};
  // Average ranks: x -> 1, 2.5, 2.5, 4.
  const double mx = 2.5, my = 2.5;
  const std::vector<double> rx{1, 2.5, 2.5, 4}, ry{1, 3, 2, 4};
  double sxy = 0, sxx = 0, syy = 0;
  for (int i = 0; i < 4; ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  EXPECT_NEAR(spearman(x, y), sxy / std::sqrt(sxx * syy), 1e-12);
}

TEST(Bootstrap, ConstantHasZeroWidth) {
  const std::vector<double> v(30, 2.5);
  const auto ci = bootstrap_mean_ci(v, 500, 3);
  EXPECT_EQ(ci.mean, 2.5);
  EXPECT_EQ(ci.lo, 2.5);
  EXPECT_EQ(ci.hi, 2.5);
  const std::vector<double> a{1, 2, 3, 4}, b{0, 1, 2, 3};
  const auto d = paired_bootstrap_ci(a, b, 500, 3);
  EXPECT_EQ(d.lo, 1.0);
  EXPECT_EQ(d.hi, 1.0);
}

TEST(Bootstrap, CoversMeanAndIsSeeded) {
  Rng rng(4);
  std::vector<double> v(100);
  for (auto& x : v) x = rng.normal(1.0, 1.0);
  const auto a = bootstrap_mean_ci(v, 1000, 9);
  const auto b = bootstrap_mean_ci(v, 1000, 9);
  EXPECT_EQ(a.lo, b.lo);
  EXPECT_EQ(a.hi, b.hi);
  EXPECT_LT(a.lo, a.mean);
  EXPECT_GT(a.hi, a.mean);
  // Roughly +-1.96 standard errors.
  EXPECT_NEAR(a.hi - a.lo, 2 * 1.96 * 0.1, 0.1);
}

TEST(Experiment, RecordsShareTasksAcrossStrategies) {
  const auto cfg = small_config();
  const auto out = run_experiment(cfg, {});
  ASSERT_EQ(out.records.size(), 6u);
  ASSERT_EQ(out.tasks.size(), 3u);
  for (std::size_t s = 0; s < 3; ++s) {
    const auto& r0 = out.records[2 * s];
    const auto& r1 = out.records[2 * s + 1];
    EXPECT_EQ(r0.seed, cfg.seeds[s]);
    EXPECT_EQ(r0.task_hash, r1.task_hash);
    EXPECT_EQ(r0.task_hash, task_hash(out.tasks[s]));
    EXPECT_TRUE(r0.error.empty());
    EXPECT_EQ(r0.regret.size(), 6u);
    EXPECT_EQ(r0.agreement.size(), 6u);
  }
  EXPECT_NE(out.records[0].task_hash, out.records[2].task_hash);
  for (const auto& r : out.records)
    if (r.strategy == "oracle") EXPECT_NEAR(r.regret[0], 0.0, 1e-12);
}

TEST(Experiment, RerunIsByteIdentical) {
  const auto cfg = small_config();
  const auto a = run_experiment(cfg, {});
  const auto b = run_experiment(cfg, {});
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i)
    EXPECT_EQ(record_to_json(a.records[i]).dump(), record_to_json(b.records[i]).dump());
}

TEST(Experiment, UnknownStrategyIsRecordedAsError) {
  auto task = make_replica_task(small_config(), 0);
  const auto r = run_strategy("no_such_strategy", {}, task, 0);
  EXPECT_FALSE(r.error.empty());
}

TEST(Emit, FilesAndAggregate) {
  const auto cfg = small_config();
  const auto out = run_experiment(cfg, {});
  const auto dir = scratch("emit");
  emit_results(out, cfg, dir.string());
  for (const auto& name : {"aggregate.csv", "profiles.csv", "timing.csv", "config.json"})
    EXPECT_TRUE(fs::exists(dir / name)) << name;
  for (auto s : cfg.seeds) EXPECT_TRUE(fs::exists(dir / "tasks" / ("seed_" + std::to_string(s) + ".json")));

  const auto rows = read_csv(dir / "aggregate.csv");
  ASSERT_EQ(rows.size(), 1u + cfg.horizon * cfg.strategies.size());
  EXPECT_EQ(rows[0][0], "strategy");
  EXPECT_EQ(rows[0][3], "regret_mean");
  for (std::size_t k = 1; k < rows.size(); ++k) {
    const std::string& strat = rows[k][0];
    const std::size_t step = std::stoul(rows[k][1]);
    double sum = 0.0;
    int n = 0;
    for (const auto& r : out.records)
      if (r.strategy == strat) sum += r.regret[step - 1], ++n;
    EXPECT_EQ(std::stoi(rows[k][2]), n);
    EXPECT_NEAR(std::stod(rows[k][3]), sum / n, 1e-9);
    EXPECT_LE(std::stod(rows[k][4]), std::stod(rows[k][3]) + 1e-9);
    EXPECT_GE(std::stod(rows[k][5]), std::stod(rows[k][3]) - 1e-9);
  }
  EXPECT_EQ(read_csv(dir / "profiles.csv").size(), 1u + cfg.seeds.size());

  // Records round-trip through disk.
  for (const auto& r : out.records) {
    const auto p = dir / "runs" / (r.strategy + "_seed" + std::to_string(r.seed) + ".json");
    ASSERT_TRUE(fs::exists(p));
    const auto back = record_from_json(read_json_file(p.string()));
    EXPECT_EQ(record_to_json(back).dump(), record_to_json(r).dump());
  }
  ExperimentConfig back = read_json_file((dir / "config.json").string());
  EXPECT_EQ(nlohmann::json(back).dump(), nlohmann::json(cfg).dump());
  fs::remove_all(dir);
}

TEST(Config, SeedListsAndValidation) {
  EXPECT_EQ(parse_seed_list("0-3,7"), (std::vector<std::uint64_t>{0, 1, 2, 3, 7}));
  EXPECT_EQ(parse_seed_list("5"), (std::vector<std::uint64_t>{5}));
  EXPECT_THROW(parse_seed_list("3-1"), std::invalid_argument);
  ExperimentConfig cfg;
  cfg.horizon = 0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  nlohmann::json j = ExperimentConfig{};
  j["seeds"] = "0-4";
  EXPECT_EQ(j.get<ExperimentConfig>().seeds.size(), 5u);
}
