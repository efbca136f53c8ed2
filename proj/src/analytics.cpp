#include "lobsim/analytics.hpp"

#include "lobsim/error.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

namespace lobsim {

namespace {

// Margin separating "equal" from "strictly less" in the recurrence checks.
constexpr double kBoundaryTolerance = 1e-12;

double sum_exits(const Spectrum& spec, const ModelParams& params, QueuePair start, Side depleted,
                 double rate) {
  double total = 0.0;
  for (int w = 1; w <= params.n_star(); ++w) {
    total += std::isinf(rate) ? u_joint(spec, params, kInfiniteTime, start, {depleted, w})
                              : exp_killed_depletion(spec, params, rate, start, {depleted, w});
  }
  return total;
}

// p(b, a, z) for every interior (b, a) at a fixed spread.
std::vector<double> prob_up_table(const Spectrum& spec, const ModelParams& params, int spread) {
  const int n = params.n_star();
  std::vector<double> table(static_cast<std::size_t>(n * n));
  for (int b = 1; b <= n; ++b) {
    for (int a = 1; a <= n; ++a) {
      table[static_cast<std::size_t>(spec.lattice.flat(b, a))] =
          prob_up(spec, params, {b, a, spread});
    }
  }
  return table;
}

}  // namespace

ProbUpParts prob_up_parts(const Spectrum& spec, const ModelParams& params, QueuePair start) {
  const double rate = 2.0 * params.alpha();
  ProbUpParts parts;
  parts.via_depletion = sum_exits(spec, params, start, Side::Ask, rate);
  parts.down_via_depletion = sum_exits(spec, params, start, Side::Bid, rate);
  // The two in-spread clocks are exchangeable, so each side takes half of
  // P[arrival before depletion].
  parts.via_arrival =
      checked_probability(0.5 * (1.0 - parts.via_depletion - parts.down_via_depletion));
  return parts;
}

double prob_up(const Spectrum& spec, const ModelParams& params, const BookState& state) {
  validate_state(params, state);
  const QueuePair start{state.bid, state.ask};
  if (state.spread == 1) {
    return checked_probability(sum_exits(spec, params, start, Side::Ask, kInfiniteTime));
  }
  const ProbUpParts parts = prob_up_parts(spec, params, start);
  return checked_probability(parts.via_depletion + parts.via_arrival);
}

double prob_two_up(const Spectrum& spec, const ModelParams& params, const BookState& state) {
  validate_state(params, state);
  const int n = params.n_star();
  const QueuePair start{state.bid, state.ask};
  const double rate = 2.0 * params.alpha();

  // After an up-move by ask depletion the spread is at least 2.
  const std::vector<double> after_depletion = prob_up_table(spec, params, 2);
  std::vector<double> after_arrival;
  if (state.spread >= 2) after_arrival = prob_up_table(spec, params, std::max(state.spread - 1, 1));

  const auto p_at = [&](const std::vector<double>& table, int b, int a) {
    return table[static_cast<std::size_t>(spec.lattice.flat(b, a))];
  };

  double total = 0.0;
  for (int j = 1; j <= n; ++j) {
    // First move up by ask depletion: bid j survives, ask resets to i.
    const double depletion =
        state.spread == 1 ? u_joint(spec, params, kInfiniteTime, start, {Side::Ask, j})
                          : exp_killed_depletion(spec, params, rate, start, {Side::Ask, j});
    // First move up by bid-side in-spread arrival: ask stays at j, bid resets to i.
    const double arrival = state.spread == 1
                               ? 0.0
                               : exp_window_occupancy(spec, params, rate, start, Side::Ask, j);
    for (int i = 1; i <= n; ++i) {
      const double f = params.reset_prob(i);
      if (f == 0.0) continue;
      total += f * depletion * p_at(after_depletion, j, i);
      if (arrival != 0.0) total += f * arrival * p_at(after_arrival, i, j);
    }
  }
  return checked_probability(total);
}

CurveTable tau_curves(const Spectrum& spec, const ModelParams& params, const BookState& state,
                      const std::vector<double>& grid) {
  validate_state(params, state);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] >= 0.0) || !std::isfinite(grid[i]) || (i > 0 && !(grid[i] > grid[i - 1]))) {
      throw Error(ErrorCode::InvalidArgument, "time grid must be finite, >= 0 and strictly increasing");
    }
  }
  CurveTable table;
  table.quantity = "tau";
  table.state = state;
  table.t = grid;
  table.survival.reserve(grid.size());
  table.density.reserve(grid.size());
  for (double t : grid) {
    table.survival.push_back(1.0 - tau_cdf(spec, params, t, state));
    table.density.push_back(tau_density(spec, params, t, state));
  }
  return table;
}

void write_csv(std::ostream& out, const CurveTable& table) {
  out << "t,survival,density\n" << std::setprecision(17);
  for (std::size_t i = 0; i < table.t.size(); ++i) {
    out << table.t[i] << ',' << table.survival[i] << ',' << table.density[i] << '\n';
  }
}

const char* phi_regime_name(PhiRegime regime) noexcept {
  switch (regime) {
    case PhiRegime::DistinctRoots: return "distinct_roots";
    case PhiRegime::DoubleRoot: return "double_root";
    case PhiRegime::Oscillatory: return "oscillatory";
  }
  return "unknown";
}

RecurrenceReport recurrence_report(const Spectrum& spec, const ModelParams& params, int j_max) {
  if (j_max < 2) throw Error(ErrorCode::InvalidArgument, "j_max must be >= 2");
  const int n = params.n_star();
  const double rate = 2.0 * params.alpha();
  const auto depletion_first = [&](QueuePair start) {
    return checked_probability(sum_exits(spec, params, start, Side::Ask, rate) +
                               sum_exits(spec, params, start, Side::Bid, rate));
  };

  RecurrenceReport r;
  r.p_one = depletion_first({1, 1});
  r.p_nstar = depletion_first({n, n});
  r.condition_ok = params.recurrence_ok();
  r.p_one_lt_half = r.p_one < 0.5 - kBoundaryTolerance;

  // phi solves p1 phi(j+1) + (1 - pN) phi(j-1) = phi(j).
  const double product = r.p_one * (1.0 - r.p_nstar);
  const double disc = product - 0.25;
  if (std::abs(disc) <= kBoundaryTolerance) {
    r.regime = PhiRegime::DoubleRoot;
  } else if (disc < 0.0) {
    r.regime = PhiRegime::DistinctRoots;
  } else {
    r.regime = PhiRegime::Oscillatory;
    r.theta = std::atan(std::sqrt(4.0 * product - 1.0));
  }

  r.phi.reserve(static_cast<std::size_t>(j_max));
  for (int j = 1; j <= j_max; ++j) {
    const double jd = static_cast<double>(j);
    switch (r.regime) {
      case PhiRegime::DistinctRoots:
        r.phi.push_back(std::pow((1.0 + std::sqrt(1.0 - 4.0 * product)) / (2.0 * r.p_one), jd));
        break;
      case PhiRegime::DoubleRoot:
        r.phi.push_back(std::pow(1.0 / (2.0 * r.p_one), jd));
        break;
      case PhiRegime::Oscillatory:
        r.phi.push_back(std::pow((1.0 - r.p_nstar) / r.p_one, jd / 2.0) * std::cos(jd * r.theta));
        break;
    }
  }
  return r;
}

}  // namespace lobsim
