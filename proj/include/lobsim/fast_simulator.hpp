#pragma once

#include "lobsim/model.hpp"
#include "lobsim/path.hpp"
#include "lobsim/rng.hpp"
#include "lobsim/spectral.hpp"

#include <cstdint>
#include <memory>
#include <mutex>
#include <span>
#include <utility>
#include <vector>

namespace lobsim {

enum class OutcomeKind {
  AskDepleted,  // level = surviving bid size
  BidDepleted,  // level = surviving ask size
  InSpreadBid,  // level = ask size at arrival
  InSpreadAsk,  // level = bid size at arrival
};

struct OutcomeCategory {
  OutcomeKind kind = OutcomeKind::AskDepleted;
  int level = 1;

  friend bool operator==(const OutcomeCategory&, const OutcomeCategory&) = default;
};

inline int category_index(OutcomeCategory c, int n_star) {
  return static_cast<int>(c.kind) * n_star + (c.level - 1);
}

inline OutcomeCategory category_at(int index, int n_star) {
  return {static_cast<OutcomeKind>(index / n_star), index % n_star + 1};
}

// +1 half-tick for moves that raise the mid-price, -1 otherwise.
inline int price_move(OutcomeKind kind) {
  return kind == OutcomeKind::AskDepleted || kind == OutcomeKind::InSpreadBid ? 1 : -1;
}

// Book right after the price change, given the freshly drawn size of the
// queue that moved.
BookState next_state(const BookState& state, OutcomeCategory outcome, int reset_size);

// Evaluates exp(-(shift + r_k) t) for every mode. The operator is a Kronecker
// sum of two single-queue operators, so each exponential factors into
// per-queue terms and costs O(n_star) exp() calls instead of O(n_star^2).
class DecayTable {
 public:
  explicit DecayTable(const Spectrum& spec);

  std::size_t size() const noexcept { return pairs_.size(); }
  bool factorized() const noexcept { return factorized_; }

  void evaluate(double t, double shift, std::span<double> out) const;

 private:
  Eigen::VectorXd decay_;
  double base_ = 0.0;                  // 2(lambda + upsilon) - 4 sqrt(lambda upsilon)
  std::vector<double> line_rates_;     // -sqrt(lambda upsilon) * eta_i >= 0
  std::vector<std::pair<int, int>> pairs_;
  bool factorized_ = false;
};

// Closed-form sub-distribution of one outcome category:
// P[tau <= t, outcome] = sum_k weights[k] (1 - exp(-(shift + r_k) t)).
struct CategoryLaw {
  OutcomeCategory category;
  double mass = 0.0;
  double mean_time = 0.0;  // E[tau | outcome]
  std::vector<double> weights;
  std::vector<double> weighted_rates;  // weights[k] * (shift + r_k)
};

struct CyclePlan {
  QueuePair start;
  bool wide = false;       // spread > 1: in-spread arrivals compete at rate 2 alpha
  double shift = 0.0;      // 2 alpha when wide
  double min_rate = 0.0;   // shift + min_k r_k
  std::vector<CategoryLaw> categories;  // indexed by category_index
  std::vector<double> cumulative;       // running sum of masses
};

CyclePlan plan_cycle(const Spectrum& spec, const ModelParams& params, const BookState& state);

struct CycleSample {
  double tau = 0.0;
  OutcomeCategory outcome;
  BookState next;
  int move = 0;
};

// Draws one price-change cycle. Throws BisectionNoConvergence if the time
// inversion fails.
CycleSample sample_price_change(const CyclePlan& plan, const DecayTable& decay,
                                const ModelParams& params, const BookState& state, Rng& rng);

// Inverse-transform time draw for one category at quantile `u` of its mass.
double invert_category_time(const CategoryLaw& law, const CyclePlan& plan, const DecayTable& decay,
                            double u);

// Draws a reset queue size from f.
int sample_reset(const ModelParams& params, Rng& rng);

// Exact price-path simulator driven by the spectral laws. Plans are built
// lazily per (bid, ask, regime) and shared read-only across threads.
class FastSimulator {
 public:
  explicit FastSimulator(const ModelParams& params);
  FastSimulator(const ModelParams& params, std::shared_ptr<const Spectrum> spectrum);

  FastSimulator(const FastSimulator&) = delete;
  FastSimulator& operator=(const FastSimulator&) = delete;

  const ModelParams& params() const noexcept { return params_; }
  const Spectrum& spectrum() const noexcept { return *spectrum_; }
  std::shared_ptr<const Spectrum> spectrum_ptr() const noexcept { return spectrum_; }
  const DecayTable& decay_table() const noexcept { return decay_; }

  const CyclePlan& plan(const BookState& state) const;
  CycleSample step(const BookState& state, Rng& rng) const;

  PathRecord simulate_path(const BookState& initial, double horizon, std::uint64_t seed,
                           std::uint64_t path_index = 0) const;

 private:
  ModelParams params_;
  std::shared_ptr<const Spectrum> spectrum_;
  DecayTable decay_;
  std::unique_ptr<std::once_flag[]> plan_once_;
  mutable std::vector<std::unique_ptr<CyclePlan>> plans_;
};

}  // namespace lobsim
