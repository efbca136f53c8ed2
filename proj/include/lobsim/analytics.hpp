#pragma once

#include "lobsim/model.hpp"
#include "lobsim/spectral.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace lobsim {

// P[next price move is up | state]. Up means the ask queue empties, or an
// in-spread order arrives on the bid side.
double prob_up(const Spectrum& spec, const ModelParams& params, const BookState& state);

// Parts of prob_up for spread >= 2: up via ask depletion before an in-spread
// arrival, and up via a bid-side in-spread arrival.
struct ProbUpParts {
  double via_depletion = 0.0;
  double via_arrival = 0.0;
  double down_via_depletion = 0.0;
};
ProbUpParts prob_up_parts(const Spectrum& spec, const ModelParams& params, QueuePair start);

// P[the next two price moves are both up | state].
double prob_two_up(const Spectrum& spec, const ModelParams& params, const BookState& state);

struct CurveTable {
  std::string quantity;
  BookState state;
  std::vector<double> t;
  std::vector<double> survival;
  std::vector<double> density;
};

// Survival function and density of the time to the next price change.
// Throws InvalidArgument unless the grid is non-negative and strictly increasing.
CurveTable tau_curves(const Spectrum& spec, const ModelParams& params, const BookState& state,
                      const std::vector<double>& grid);

// Columns t,survival,density; 17 significant digits.
void write_csv(std::ostream& out, const CurveTable& table);

enum class PhiRegime { DistinctRoots, DoubleRoot, Oscillatory };

const char* phi_regime_name(PhiRegime regime) noexcept;

struct RecurrenceReport {
  double p_one = 0.0;    // P(L > depletion time from (1, 1))
  double p_nstar = 0.0;  // P(L > depletion time from (n*, n*))
  std::vector<double> phi;  // phi(1..j_max)
  PhiRegime regime = PhiRegime::DistinctRoots;
  double theta = 0.0;       // rotation angle, oscillatory branch only
  bool condition_ok = false;   // alpha >= mu + theta
  bool p_one_lt_half = false;
};

RecurrenceReport recurrence_report(const Spectrum& spec, const ModelParams& params, int j_max = 50);

}  // namespace lobsim
