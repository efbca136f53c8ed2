#pragma once

#include "lobsim/event_oracle.hpp"
#include "lobsim/fast_simulator.hpp"
#include "lobsim/model.hpp"
#include "lobsim/path.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace lobsim {

enum class Engine { Fast, Oracle };

const char* engine_name(Engine engine) noexcept;

struct McStudyConfig {
  BookState initial;
  std::vector<double> horizons;  // sec, positive and increasing
  std::size_t n_paths = 1000;
  std::uint64_t seed = 0;
  Engine engine = Engine::Fast;
  unsigned workers = 1;
};

struct Gaussianity {
  double skewness = 0.0;
  double skewness_se = 0.0;
  double excess_kurtosis = 0.0;
  double excess_kurtosis_se = 0.0;
  double ks_distance = 0.0;  // sup |F_n - Phi| against a normal with fitted mean / variance
};

struct HorizonSummary {
  double horizon = 0.0;
  std::size_t n_paths = 0;
  double mean_mid = 0.0;         // half-ticks
  double mean_mid_se = 0.0;
  double drift_rate = 0.0;       // half-ticks / sec
  double drift_rate_se = 0.0;
  double var_rate = 0.0;         // half-ticks^2 / sec
  double var_rate_se = 0.0;
  double mean_duration = 0.0;    // mean of t / N_t over paths with N_t >= 1 (sec)
  double mean_duration_se = 0.0;
  std::size_t paths_without_change = 0;
  SpreadOccupancy occupancy{};   // mean over paths
  SpreadOccupancy occupancy_se{};
  Gaussianity gaussianity;
  std::vector<std::int64_t> final_mids;  // s_t per path, by path index
};

struct McSummary {
  Engine engine = Engine::Fast;
  std::uint64_t seed = 0;
  BookState initial;
  std::vector<HorizonSummary> horizons;
};

// Runs `body(i)` for i in [0, n) on `workers` threads. Each index is handled
// exactly once; callers write results into per-index slots.
void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& body);

// Per-path reductions kept by a study; full epoch lists are dropped.
struct PathStats {
  std::int64_t final_mid = 0;
  std::size_t changes = 0;
  SpreadOccupancy occupancy{};
};

PathStats path_stats(const PathRecord& path);

// Summary statistics for paths sharing one horizon, aggregated in path-index order.
HorizonSummary summarize(const std::vector<PathStats>& paths, double horizon);

// Independent paths for every horizon; output does not depend on `workers`.
McSummary run_study(const ModelParams& params, const McStudyConfig& config,
                    const FastSimulator* fast = nullptr);

struct FcltReport {
  double ratio = 1.0;          // var_rate(t) / var_rate(c t)
  double ratio_se = 0.0;
  double ratio_lo = 1.0;
  double ratio_hi = 1.0;
  bool ratio_contains_one = true;
  double drift_diff = 0.0;     // drift_rate(t) - drift_rate(c t)
  double drift_diff_se = 0.0;
  bool drift_contains_zero = true;
};

// Confidence intervals are +-3 standard errors. Throws InvalidArgument unless
// the second horizon is at least twice the first.
FcltReport fclt_check(const HorizonSummary& shorter, const HorizonSummary& longer);

struct LlnTrace {
  std::vector<double> running_mean;  // T_n / n for n = 1..n_changes
  double final_mean = 0.0;
  double last_decile_rel_range = 0.0;  // (max - min) / final_mean over the last 10%
};

LlnTrace lln_check(const FastSimulator& sim, const BookState& initial, std::size_t n_changes,
                   std::uint64_t seed);

// JSON document with one object per horizon.
std::string to_json(const McSummary& summary);

// One row per horizon.
void write_csv(std::ostream& out, const McSummary& summary);

// Histogram of s_t with the fitted normal density at each bin centre.
// Columns mid_half_ticks,empirical_density,normal_density.
void write_density_csv(std::ostream& out, const HorizonSummary& summary);

// Columns spread,fraction,std_error with spread in {1,2,3,4+}.
void write_occupancy_csv(std::ostream& out, const HorizonSummary& summary);

}  // namespace lobsim
