#pragma once

#include "lobsim/model.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <vector>

namespace lobsim {

// State right after one price change.
struct PathEpoch {
  double time = 0.0;       // sec since the start of the path
  std::int64_t mid = 0;    // mid-price in half-ticks, 0 at time 0
  int spread = 1;
  int bid = 1;
  int ask = 1;
};

struct PathRecord {
  BookState initial;
  double horizon = 0.0;
  std::vector<PathEpoch> epochs;  // strictly increasing times, all <= horizon

  std::int64_t final_mid() const noexcept { return epochs.empty() ? 0 : epochs.back().mid; }
  std::size_t changes() const noexcept { return epochs.size(); }
};

// Throws InternalConsistency if the record breaks a path invariant: unit mid
// steps, unit spread steps, spread >= 1, queues in {1..n_star}, times in
// (0, horizon] and strictly increasing.
void check_path(const PathRecord& path, int n_star);

// Spread bins {1, 2, 3, 4+}.
using SpreadOccupancy = std::array<double, 4>;

// Fraction of [0, horizon] spent at each spread bin.
SpreadOccupancy occupancy(const PathRecord& path);

// Columns epoch_s,mid_half_ticks,spread,bid,ask. The first row is the initial
// state at time 0.
void write_csv(std::ostream& out, const PathRecord& path);

}  // namespace lobsim
