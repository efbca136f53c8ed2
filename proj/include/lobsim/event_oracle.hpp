#pragma once

#include "lobsim/fast_simulator.hpp"
#include "lobsim/model.hpp"
#include "lobsim/path.hpp"
#include "lobsim/rng.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <vector>

namespace lobsim {

enum class EventKind { LimitOrder, MarketOrder, Cancellation, InSpreadOrder };

const char* event_kind_name(EventKind kind) noexcept;

struct EventRecord {
  double time = 0.0;
  Side side = Side::Bid;
  EventKind kind = EventKind::LimitOrder;
  int bid = 0;      // queue sizes after the event (0 right at a depletion)
  int ask = 0;
  int spread = 1;   // spread after the event
  std::int64_t mid = 0;
};

struct EventTrace {
  std::vector<EventRecord> log;  // empty unless requested
  PathRecord path;
  std::uint64_t event_count = 0;
};

// Brute-force simulation of every order event: competing exponential clocks
// for limit arrivals, market orders and cancellations on both queues, plus
// in-spread arrivals while the spread exceeds one tick.
class EventOracle {
 public:
  explicit EventOracle(const ModelParams& params) : params_(params) {}

  const ModelParams& params() const noexcept { return params_; }

  // Runs one price-change cycle from `state`; appends to `log` when non-null.
  CycleSample run_cycle(const BookState& state, Rng& rng, double clock = 0.0,
                        std::int64_t mid = 0, std::vector<EventRecord>* log = nullptr,
                        std::uint64_t* events = nullptr) const;

  EventTrace simulate_events(const BookState& initial, double horizon, std::uint64_t seed,
                             std::uint64_t path_index = 0, bool keep_log = false) const;

 private:
  ModelParams params_;
};

// Columns time_s,side,kind,bid,ask,spread,mid_half_ticks.
void write_csv(std::ostream& out, const std::vector<EventRecord>& log);

// Empirical law of the first cycle over independent runs.
struct FirstCycleEstimate {
  std::size_t runs = 0;
  std::vector<double> taus;                     // sorted ascending
  std::vector<std::size_t> category_counts;     // indexed by category_index
  std::map<std::pair<int, int>, std::size_t> next_state_counts;  // (bid, ask) after the change
  std::size_t up_moves = 0;

  double frequency(int category) const;
  double standard_error(int category) const;
  double empirical_cdf(double t) const;
};

FirstCycleEstimate estimate_first_cycle(const ModelParams& params, const BookState& initial,
                                        std::size_t n_runs, std::uint64_t seed);

}  // namespace lobsim
