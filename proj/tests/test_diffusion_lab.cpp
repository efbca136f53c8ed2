#include "lobsim/diffusion_lab.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

#include "support.hpp"

#include <atomic>
#include <cmath>
#include <numeric>
#include <sstream>

using namespace lobsim;
using testing::code_of;

namespace {

PathRecord record(BookState initial, double horizon, std::vector<PathEpoch> epochs) {
  PathRecord r;
  r.initial = initial;
  r.horizon = horizon;
  r.epochs = std::move(epochs);
  return r;
}

HorizonSummary summary_with(double horizon, double drift, double drift_se, double var, double var_se) {
  HorizonSummary h;
  h.horizon = horizon;
  h.drift_rate = drift;
  h.drift_rate_se = drift_se;
  h.var_rate = var;
  h.var_rate_se = var_se;
  return h;
}

}  // namespace

TEST_CASE("occupancy of hand-built paths") {
  const SpreadOccupancy still = occupancy(record({1, 1, 1}, 10.0, {}));
  CHECK(still[0] == 1.0);
  CHECK(still[1] == 0.0);

  const SpreadOccupancy two = occupancy(record({1, 1, 1}, 10.0, {{4.0, 1, 2, 1, 1}}));
  CHECK(two[0] == doctest::Approx(0.4));
  CHECK(two[1] == doctest::Approx(0.6));

  const SpreadOccupancy wide = occupancy(record({1, 1, 5}, 2.0, {{1.0, -1, 4, 1, 1}, {1.5, 0, 3, 1, 1}}));
  CHECK(wide[3] == doctest::Approx(0.75));
  CHECK(wide[2] == doctest::Approx(0.25));
}

TEST_CASE("path stats and summaries") {
  std::vector<PathStats> stats;
  for (int i = 0; i < 4; ++i) {
    const PathRecord r = record({1, 1, 1}, 2.0, {{0.5, 1, 2, 1, 1}, {1.0, 2 * (i % 2), 1, 1, 1}});
    stats.push_back(path_stats(r));
  }
  stats.push_back(path_stats(record({1, 1, 1}, 2.0, {})));
  CHECK(stats[1].final_mid == 2);
  CHECK(stats[1].changes == 2);

  const HorizonSummary h = summarize(stats, 2.0);
  CHECK(h.n_paths == 5);
  CHECK(h.paths_without_change == 1);
  CHECK(h.mean_mid == doctest::Approx(4.0 / 5));
  CHECK(h.drift_rate == doctest::Approx(0.4));
  // Four paths with two changes over 2 sec.
  CHECK(h.mean_duration == doctest::Approx(1.0));
  CHECK(h.mean_duration_se == doctest::Approx(0.0));
  CHECK(std::accumulate(h.occupancy.begin(), h.occupancy.end(), 0.0) == doctest::Approx(1.0));
  CHECK(h.occupancy[1] == doctest::Approx(0.8 * 0.25));
  CHECK(h.final_mids == std::vector<std::int64_t>{0, 2, 0, 2, 0});
  // Sample variance of {0,2,0,2,0} is 1.2.
  CHECK(h.var_rate == doctest::Approx(0.6));
  CHECK(h.gaussianity.skewness_se == doctest::Approx(std::sqrt(6.0 / 5)));

  CHECK(code_of([&] { summarize({stats[0]}, 2.0); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("gaussianity of a large symmetric sample") {
  const ModelParams p = validate_params({12, 13, 0, 13, 5, {}});
  McStudyConfig cfg;
  cfg.initial = {3, 3, 1};
  cfg.horizons = {20.0};
  cfg.n_paths = 600;
  cfg.seed = 5;
  const McSummary s = run_study(p, cfg);
  const HorizonSummary& h = s.horizons.front();
  CHECK(std::abs(h.drift_rate) <= 4 * h.drift_rate_se);
  CHECK(std::abs(h.gaussianity.skewness) <= 4 * h.gaussianity.skewness_se);
  CHECK(std::abs(h.gaussianity.excess_kurtosis) <= 4 * h.gaussianity.excess_kurtosis_se);
  CHECK(h.gaussianity.ks_distance < 0.1);
  CHECK(h.var_rate > 0.0);
}

TEST_CASE("fclt ratio and drift intervals") {
  const HorizonSummary a = summary_with(60, 0.01, 0.02, 5.0, 0.2);
  const FcltReport same = fclt_check(a, summary_with(300, 0.01, 0.02, 5.0, 0.2));
  CHECK(same.ratio == 1.0);
  CHECK(same.ratio_contains_one);
  CHECK(same.drift_diff == 0.0);
  CHECK(same.drift_contains_zero);
  CHECK(same.ratio_lo < 1.0);
  CHECK(same.ratio_hi > 1.0);

  const FcltReport off = fclt_check(a, summary_with(300, 0.5, 0.02, 2.5, 0.05));
  CHECK(off.ratio == doctest::Approx(2.0));
  CHECK_FALSE(off.ratio_contains_one);
  CHECK_FALSE(off.drift_contains_zero);
  // Delta method: (se_a / v_b)^2 + (v_a se_b / v_b^2)^2.
  CHECK(off.ratio_se == doctest::Approx(std::hypot(0.2 / 2.5, 5.0 * 0.05 / 6.25)));

  CHECK(code_of([&] { fclt_check(a, summary_with(100, 0, 0, 5, 0.1)); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([&] { fclt_check(a, summary_with(300, 0, 0, 0, 0)); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("law of large numbers for the mean duration") {
  // One-lot queues: each depletion takes Exp(2) time, and the spread then
  // closes almost immediately, so the mean duration tends to 1/4.
  const ModelParams p = validate_params({1, 1, 0, 1e6, 1, {}});
  const FastSimulator sim(p);
  const LlnTrace tr = lln_check(sim, {1, 1, 1}, 20000, 3);
  REQUIRE(tr.running_mean.size() == 20000);
  CHECK(tr.final_mean == doctest::Approx(0.25).epsilon(0.05));
  CHECK(tr.running_mean.back() == tr.final_mean);
  CHECK(tr.last_decile_rel_range < 0.05);
  CHECK(code_of([&] { lln_check(sim, {1, 1, 1}, 10, 3); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("study output does not depend on the worker count") {
  const ModelParams p = validate_params({2204, 2331, 0, 2332, 10, {}});
  McStudyConfig cfg;
  cfg.initial = {5, 5, 4};
  cfg.horizons = {0.5, 1.0};
  cfg.n_paths = 40;
  cfg.seed = 99;
  const McSummary one = run_study(p, cfg);
  cfg.workers = 3;
  const McSummary three = run_study(p, cfg);
  REQUIRE(one.horizons.size() == 2);
  CHECK(to_json(one) == to_json(three));
  CHECK(one.horizons[0].final_mids == three.horizons[0].final_mids);
  CHECK(one.horizons[0].final_mids != one.horizons[1].final_mids);
}

TEST_CASE("fast and oracle engines agree on spread occupancy") {
  const ModelParams p = validate_params({12, 13, 0, 13, 4, {}});
  McStudyConfig cfg;
  cfg.initial = {2, 2, 1};
  cfg.horizons = {10.0};
  cfg.n_paths = 300;
  cfg.seed = 8;
  const HorizonSummary fast = run_study(p, cfg).horizons.front();
  cfg.engine = Engine::Oracle;
  const HorizonSummary slow = run_study(p, cfg).horizons.front();
  for (int b = 0; b < 4; ++b) {
    const double se = std::hypot(fast.occupancy_se[b], slow.occupancy_se[b]);
    CHECK(std::abs(fast.occupancy[b] - slow.occupancy[b]) <= 4 * se + 1e-12);
  }
  const double dse = std::hypot(fast.mean_duration_se, slow.mean_duration_se);
  CHECK(std::abs(fast.mean_duration - slow.mean_duration) <= 4 * dse);
}

TEST_CASE("parallel_for visits each index once and rethrows") {
  std::vector<std::atomic<int>> hits(100);
  parallel_for(100, 4, [&](std::size_t i) { ++hits[i]; });
  for (auto& h : hits) CHECK(h.load() == 1);
  CHECK_THROWS_AS(parallel_for(10, 2, [](std::size_t i) { if (i == 7) throw std::runtime_error("x"); }),
                  std::runtime_error);
}

TEST_CASE("study writers") {
  const ModelParams p = validate_params({12, 13, 0, 13, 4, {}});
  McStudyConfig cfg;
  cfg.initial = {2, 2, 1};
  cfg.horizons = {1.0, 2.0};
  cfg.n_paths = 50;
  cfg.seed = 1;
  const McSummary s = run_study(p, cfg);

  const auto doc = nlohmann::json::parse(to_json(s));
  CHECK(doc["engine"] == "fast");
  REQUIRE(doc["horizons"].size() == 2);
  CHECK(doc["horizons"][1]["horizon"].get<double>() == 2.0);

  std::ostringstream csv;
  write_csv(csv, s);
  const std::string text = csv.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == 3);

  std::ostringstream dens;
  write_density_csv(dens, s.horizons[1]);
  CHECK(dens.str().rfind("mid_half_ticks,empirical_density,normal_density\n", 0) == 0);

  std::ostringstream occ;
  write_occupancy_csv(occ, s.horizons[1]);
  const std::string occ_text = occ.str();
  CHECK(occ_text.rfind("spread,fraction,std_error\n", 0) == 0);
  CHECK(std::count(occ_text.begin(), occ_text.end(), '\n') == 5);
}

TEST_CASE("study argument errors") {
  const ModelParams p = validate_params({1, 1, 0, 1, 3, {}});
  McStudyConfig cfg;
  cfg.initial = {1, 1, 1};
  cfg.horizons = {1.0};
  cfg.n_paths = 1;
  CHECK(code_of([&] { run_study(p, cfg); }) == ErrorCode::InvalidArgument);
  cfg.n_paths = 10;
  cfg.horizons = {2.0, 1.0};
  CHECK(code_of([&] { run_study(p, cfg); }) == ErrorCode::InvalidArgument);
  cfg.horizons = {};
  CHECK(code_of([&] { run_study(p, cfg); }) == ErrorCode::InvalidArgument);
  cfg.horizons = {1.0};
  cfg.initial = {4, 1, 1};
  CHECK(code_of([&] { run_study(p, cfg); }) == ErrorCode::InvalidArgument);
}
