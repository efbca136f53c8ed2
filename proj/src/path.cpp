#include "lobsim/path.hpp"

#include "lobsim/error.hpp"

#include <algorithm>
#include <cstdlib>
#include <iomanip>
#include <ostream>
#include <string>

namespace lobsim {

namespace {

std::size_t spread_bin(int spread) { return static_cast<std::size_t>(std::min(spread, 4) - 1); }

}  // namespace

void check_path(const PathRecord& path, int n_star) {
  const auto fail = [](std::size_t i, const std::string& what) {
    throw Error(ErrorCode::InternalConsistency, "path epoch " + std::to_string(i) + ": " + what);
  };
  double prev_time = 0.0;
  std::int64_t prev_mid = 0;
  int prev_spread = path.initial.spread;
  for (std::size_t i = 0; i < path.epochs.size(); ++i) {
    const PathEpoch& e = path.epochs[i];
    if (!(e.time > prev_time) || e.time > path.horizon) fail(i, "time out of order");
    if (std::llabs(e.mid - prev_mid) != 1) fail(i, "mid step is not one half-tick");
    if (std::abs(e.spread - prev_spread) != 1) fail(i, "spread step is not one tick");
    if (e.spread < 1) fail(i, "spread below 1");
    if (e.bid < 1 || e.bid > n_star || e.ask < 1 || e.ask > n_star) fail(i, "queue size out of range");
    prev_time = e.time;
    prev_mid = e.mid;
    prev_spread = e.spread;
  }
}

SpreadOccupancy occupancy(const PathRecord& path) {
  if (!(path.horizon > 0.0)) throw Error(ErrorCode::InvalidArgument, "path has no duration");
  SpreadOccupancy occ{};
  double t = 0.0;
  int spread = path.initial.spread;
  for (const PathEpoch& e : path.epochs) {
    occ[spread_bin(spread)] += e.time - t;
    t = e.time;
    spread = e.spread;
  }
  occ[spread_bin(spread)] += path.horizon - t;
  for (double& w : occ) w /= path.horizon;
  return occ;
}

void write_csv(std::ostream& out, const PathRecord& path) {
  out << "epoch_s,mid_half_ticks,spread,bid,ask\n" << std::setprecision(17);
  out << 0.0 << ',' << 0 << ',' << path.initial.spread << ',' << path.initial.bid << ','
      << path.initial.ask << '\n';
  for (const PathEpoch& e : path.epochs) {
    out << e.time << ',' << e.mid << ',' << e.spread << ',' << e.bid << ',' << e.ask << '\n';
  }
}

}  // namespace lobsim
