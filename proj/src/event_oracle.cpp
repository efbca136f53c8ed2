#include "lobsim/event_oracle.hpp"

#include "lobsim/error.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

namespace lobsim {

const char* event_kind_name(EventKind kind) noexcept {
  switch (kind) {
    case EventKind::LimitOrder: return "limit";
    case EventKind::MarketOrder: return "market";
    case EventKind::Cancellation: return "cancel";
    case EventKind::InSpreadOrder: return "in_spread";
  }
  return "unknown";
}

CycleSample EventOracle::run_cycle(const BookState& state, Rng& rng, double clock,
                                   std::int64_t mid, std::vector<EventRecord>* log,
                                   std::uint64_t* events) const {
  const int n = params_.n_star();
  const double lambda = params_.lambda();
  const double upsilon = params_.upsilon();
  const double market_share = params_.mu() / upsilon;
  const double alpha = state.spread > 1 ? params_.alpha() : 0.0;

  int bid = state.bid;
  int ask = state.ask;
  double elapsed = 0.0;
  const auto record = [&](Side side, EventKind kind, int spread, std::int64_t m) {
    if (log) log->push_back({clock + elapsed, side, kind, bid, ask, spread, m});
  };

  for (;;) {
    // Clocks: bid birth, bid death, ask birth, ask death, bid in-spread, ask in-spread.
    const double bid_birth = bid < n ? lambda : 0.0;
    const double ask_birth = ask < n ? lambda : 0.0;
    const double total = bid_birth + upsilon + ask_birth + upsilon + 2.0 * alpha;
    elapsed += rng.exponential(total);
    if (events) ++*events;

    double u = rng.uniform() * total;
    const auto death_kind = [&](double within) {
      return within < market_share * upsilon ? EventKind::MarketOrder : EventKind::Cancellation;
    };
    if (u < bid_birth) {
      ++bid;
      record(Side::Bid, EventKind::LimitOrder, state.spread, mid);
      continue;
    }
    u -= bid_birth;
    if (u < upsilon) {
      const EventKind kind = death_kind(u);
      if (--bid == 0) {
        const int reset = sample_reset(params_, rng);
        record(Side::Bid, kind, state.spread + 1, mid - 1);
        return {elapsed, {OutcomeKind::BidDepleted, ask}, {reset, ask, state.spread + 1}, -1};
      }
      record(Side::Bid, kind, state.spread, mid);
      continue;
    }
    u -= upsilon;
    if (u < ask_birth) {
      ++ask;
      record(Side::Ask, EventKind::LimitOrder, state.spread, mid);
      continue;
    }
    u -= ask_birth;
    if (u < upsilon) {
      const EventKind kind = death_kind(u);
      if (--ask == 0) {
        const int reset = sample_reset(params_, rng);
        record(Side::Ask, kind, state.spread + 1, mid + 1);
        return {elapsed, {OutcomeKind::AskDepleted, bid}, {bid, reset, state.spread + 1}, +1};
      }
      record(Side::Ask, kind, state.spread, mid);
      continue;
    }
    u -= upsilon;
    const int reset = sample_reset(params_, rng);
    if (u < alpha) {
      const int old_ask = ask;
      bid = reset;
      record(Side::Bid, EventKind::InSpreadOrder, state.spread - 1, mid + 1);
      return {elapsed, {OutcomeKind::InSpreadBid, old_ask}, {reset, old_ask, state.spread - 1}, +1};
    }
    const int old_bid = bid;
    ask = reset;
    record(Side::Ask, EventKind::InSpreadOrder, state.spread - 1, mid - 1);
    return {elapsed, {OutcomeKind::InSpreadAsk, old_bid}, {old_bid, reset, state.spread - 1}, -1};
  }
}

EventTrace EventOracle::simulate_events(const BookState& initial, double horizon,
                                        std::uint64_t seed, std::uint64_t path_index,
                                        bool keep_log) const {
  validate_state(params_, initial);
  if (!(horizon > 0.0)) throw Error(ErrorCode::InvalidArgument, "horizon must be positive");
  Rng rng(seed, StreamTag::OraclePath, path_index);
  EventTrace trace;
  trace.path.initial = initial;
  trace.path.horizon = horizon;
  BookState state = initial;
  double t = 0.0;
  std::int64_t mid = 0;
  std::vector<EventRecord> cycle_log;
  for (;;) {
    cycle_log.clear();
    const CycleSample s =
        run_cycle(state, rng, t, mid, keep_log ? &cycle_log : nullptr, &trace.event_count);
    if (keep_log) {
      for (const EventRecord& e : cycle_log) {
        if (e.time > horizon) break;
        trace.log.push_back(e);
      }
    }
    t += s.tau;
    if (t > horizon) break;
    mid += s.move;
    state = s.next;
    trace.path.epochs.push_back({t, mid, state.spread, state.bid, state.ask});
  }
  return trace;
}

void write_csv(std::ostream& out, const std::vector<EventRecord>& log) {
  out << "time_s,side,kind,bid,ask,spread,mid_half_ticks\n" << std::setprecision(17);
  for (const EventRecord& e : log) {
    out << e.time << ',' << (e.side == Side::Bid ? "bid" : "ask") << ',' << event_kind_name(e.kind)
        << ',' << e.bid << ',' << e.ask << ',' << e.spread << ',' << e.mid << '\n';
  }
}

double FirstCycleEstimate::frequency(int category) const {
  return static_cast<double>(category_counts.at(static_cast<std::size_t>(category))) /
         static_cast<double>(runs);
}

double FirstCycleEstimate::standard_error(int category) const {
  const double p = frequency(category);
  return std::sqrt(p * (1.0 - p) / static_cast<double>(runs));
}

double FirstCycleEstimate::empirical_cdf(double t) const {
  const auto it = std::upper_bound(taus.begin(), taus.end(), t);
  return static_cast<double>(it - taus.begin()) / static_cast<double>(taus.size());
}

FirstCycleEstimate estimate_first_cycle(const ModelParams& params, const BookState& initial,
                                        std::size_t n_runs, std::uint64_t seed) {
  validate_state(params, initial);
  if (n_runs < 1) throw Error(ErrorCode::InvalidArgument, "n_runs must be >= 1");
  const EventOracle oracle(params);
  FirstCycleEstimate est;
  est.runs = n_runs;
  est.taus.reserve(n_runs);
  est.category_counts.assign(static_cast<std::size_t>(4 * params.n_star()), 0);
  Rng rng(seed, StreamTag::FirstCycle, 0);
  for (std::size_t r = 0; r < n_runs; ++r) {
    const CycleSample s = oracle.run_cycle(initial, rng);
    est.taus.push_back(s.tau);
    ++est.category_counts[static_cast<std::size_t>(category_index(s.outcome, params.n_star()))];
    ++est.next_state_counts[{s.next.bid, s.next.ask}];
    if (s.move > 0) ++est.up_moves;
  }
  std::sort(est.taus.begin(), est.taus.end());
  return est;
}

}  // namespace lobsim
