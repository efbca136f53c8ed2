#include "lobsim/diffusion_lab.hpp"

#include "lobsim/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <exception>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <thread>

namespace lobsim {

const char* engine_name(Engine engine) noexcept {
  return engine == Engine::Fast ? "fast" : "oracle";
}

void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& body) {
  workers = std::max(1u, workers);
  if (workers == 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    threads.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += workers) body(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  if (failure) std::rethrow_exception(failure);
}

PathStats path_stats(const PathRecord& path) {
  return {path.final_mid(), path.changes(), occupancy(path)};
}

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

struct Moments {
  double mean = 0.0;
  double var = 0.0;  // unbiased
  double m2 = 0.0;   // central moments, 1/n normalization
  double m3 = 0.0;
  double m4 = 0.0;
};

Moments moments(const std::vector<double>& x) {
  Moments m;
  const auto n = static_cast<double>(x.size());
  if (x.empty()) return m;
  for (double v : x) m.mean += v;
  m.mean /= n;
  for (double v : x) {
    const double d = v - m.mean;
    m.m2 += d * d;
    m.m3 += d * d * d;
    m.m4 += d * d * d * d;
  }
  m.m2 /= n;
  m.m3 /= n;
  m.m4 /= n;
  m.var = x.size() > 1 ? m.m2 * n / (n - 1.0) : 0.0;
  return m;
}

Gaussianity gaussianity(std::vector<double> x, const Moments& m) {
  Gaussianity g;
  const auto n = static_cast<double>(x.size());
  g.skewness_se = std::sqrt(6.0 / n);
  g.excess_kurtosis_se = std::sqrt(24.0 / n);
  if (!(m.m2 > 0.0)) {
    g.ks_distance = 1.0;
    return g;
  }
  g.skewness = m.m3 / std::pow(m.m2, 1.5);
  g.excess_kurtosis = m.m4 / (m.m2 * m.m2) - 3.0;
  const double sd = std::sqrt(m.var);
  std::sort(x.begin(), x.end());
  // Ties are common (integer mid-prices): compare on both sides of each jump.
  std::size_t i = 0;
  while (i < x.size()) {
    std::size_t j = i;
    while (j < x.size() && x[j] == x[i]) ++j;
    const double phi = normal_cdf((x[i] - m.mean) / sd);
    const double before = static_cast<double>(i) / n;
    const double after = static_cast<double>(j) / n;
    g.ks_distance = std::max({g.ks_distance, std::abs(after - phi), std::abs(phi - before)});
    i = j;
  }
  return g;
}

}  // namespace

HorizonSummary summarize(const std::vector<PathStats>& paths, double horizon) {
  if (paths.size() < 2) throw Error(ErrorCode::InvalidArgument, "need at least two paths");
  HorizonSummary s;
  s.horizon = horizon;
  s.n_paths = paths.size();
  const auto n = static_cast<double>(paths.size());

  std::vector<double> mids;
  std::vector<double> durations;
  mids.reserve(paths.size());
  for (const PathStats& p : paths) {
    mids.push_back(static_cast<double>(p.final_mid));
    s.final_mids.push_back(p.final_mid);
    if (p.changes > 0) {
      durations.push_back(horizon / static_cast<double>(p.changes));
    } else {
      ++s.paths_without_change;
    }
  }

  const Moments m = moments(mids);
  s.mean_mid = m.mean;
  s.mean_mid_se = std::sqrt(m.var / n);
  s.drift_rate = m.mean / horizon;
  s.drift_rate_se = s.mean_mid_se / horizon;
  s.var_rate = m.var / horizon;
  s.var_rate_se = std::sqrt(std::max(m.m4 - m.m2 * m.m2, 0.0) / n) / horizon;
  s.gaussianity = gaussianity(mids, m);

  if (!durations.empty()) {
    const Moments d = moments(durations);
    s.mean_duration = d.mean;
    s.mean_duration_se = std::sqrt(d.var / static_cast<double>(durations.size()));
  }

  for (std::size_t b = 0; b < s.occupancy.size(); ++b) {
    std::vector<double> col;
    col.reserve(paths.size());
    for (const PathStats& p : paths) col.push_back(p.occupancy[b]);
    const Moments o = moments(col);
    s.occupancy[b] = o.mean;
    s.occupancy_se[b] = std::sqrt(o.var / n);
  }
  return s;
}

McSummary run_study(const ModelParams& params, const McStudyConfig& config,
                    const FastSimulator* fast) {
  validate_state(params, config.initial);
  if (config.n_paths < 2) throw Error(ErrorCode::InvalidArgument, "n_paths must be >= 2");
  if (config.horizons.empty()) throw Error(ErrorCode::InvalidArgument, "no horizons given");
  for (std::size_t i = 0; i < config.horizons.size(); ++i) {
    if (!(config.horizons[i] > 0.0) || (i > 0 && !(config.horizons[i] > config.horizons[i - 1]))) {
      throw Error(ErrorCode::InvalidArgument, "horizons must be positive and increasing");
    }
  }

  std::unique_ptr<FastSimulator> owned;
  std::unique_ptr<EventOracle> oracle;
  if (config.engine == Engine::Fast && fast == nullptr) {
    owned = std::make_unique<FastSimulator>(params);
    fast = owned.get();
  }
  if (config.engine == Engine::Oracle) oracle = std::make_unique<EventOracle>(params);

  McSummary summary;
  summary.engine = config.engine;
  summary.seed = config.seed;
  summary.initial = config.initial;
  for (std::size_t h = 0; h < config.horizons.size(); ++h) {
    const double horizon = config.horizons[h];
    std::vector<PathStats> stats(config.n_paths);
    parallel_for(config.n_paths, config.workers, [&](std::size_t i) {
      const std::uint64_t index = h * config.n_paths + i;
      stats[i] = config.engine == Engine::Fast
                     ? path_stats(fast->simulate_path(config.initial, horizon, config.seed, index))
                     : path_stats(oracle->simulate_events(config.initial, horizon, config.seed, index).path);
    });
    summary.horizons.push_back(summarize(stats, horizon));
  }
  return summary;
}

FcltReport fclt_check(const HorizonSummary& shorter, const HorizonSummary& longer) {
  if (!(shorter.horizon > 0.0) || longer.horizon < 2.0 * shorter.horizon) {
    throw Error(ErrorCode::InvalidArgument, "fclt_check needs the second horizon >= 2x the first");
  }
  constexpr double z = 3.0;
  FcltReport r;
  if (!(longer.var_rate > 0.0) || !(shorter.var_rate > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "variance rates must be positive");
  }
  r.ratio = shorter.var_rate / longer.var_rate;
  const double rel_a = shorter.var_rate_se / shorter.var_rate;
  const double rel_b = longer.var_rate_se / longer.var_rate;
  r.ratio_se = r.ratio * std::sqrt(rel_a * rel_a + rel_b * rel_b);
  r.ratio_lo = r.ratio - z * r.ratio_se;
  r.ratio_hi = r.ratio + z * r.ratio_se;
  r.ratio_contains_one = r.ratio_lo <= 1.0 && 1.0 <= r.ratio_hi;
  r.drift_diff = shorter.drift_rate - longer.drift_rate;
  r.drift_diff_se = std::hypot(shorter.drift_rate_se, longer.drift_rate_se);
  r.drift_contains_zero = std::abs(r.drift_diff) <= z * r.drift_diff_se;
  return r;
}

LlnTrace lln_check(const FastSimulator& sim, const BookState& initial, std::size_t n_changes,
                   std::uint64_t seed) {
  if (n_changes < 100) throw Error(ErrorCode::InvalidArgument, "n_changes must be >= 100");
  validate_state(sim.params(), initial);
  Rng rng(seed, StreamTag::Lln, 0);
  LlnTrace trace;
  trace.running_mean.reserve(n_changes);
  BookState state = initial;
  double total = 0.0;
  for (std::size_t n = 1; n <= n_changes; ++n) {
    const CycleSample s = sim.step(state, rng);
    total += s.tau;
    state = s.next;
    trace.running_mean.push_back(total / static_cast<double>(n));
  }
  trace.final_mean = trace.running_mean.back();
  const auto tail = trace.running_mean.begin() + static_cast<std::ptrdiff_t>(n_changes * 9 / 10);
  const auto [lo, hi] = std::minmax_element(tail, trace.running_mean.end());
  trace.last_decile_rel_range = (*hi - *lo) / trace.final_mean;
  return trace;
}

std::string to_json(const McSummary& summary) {
  using nlohmann::ordered_json;
  ordered_json doc;
  doc["engine"] = engine_name(summary.engine);
  doc["seed"] = summary.seed;
  doc["initial"] = {{"bid", summary.initial.bid},
                    {"ask", summary.initial.ask},
                    {"spread", summary.initial.spread}};
  ordered_json rows = ordered_json::array();
  for (const HorizonSummary& h : summary.horizons) {
    ordered_json row;
    row["horizon"] = h.horizon;
    row["n_paths"] = h.n_paths;
    row["drift_rate"] = {{"value", h.drift_rate}, {"se", h.drift_rate_se}};
    row["var_rate"] = {{"value", h.var_rate}, {"se", h.var_rate_se}};
    row["mean_duration"] = {{"value", h.mean_duration}, {"se", h.mean_duration_se}};
    row["paths_without_change"] = h.paths_without_change;
    ordered_json occ = ordered_json::array();
    const char* labels[] = {"1", "2", "3", "4+"};
    for (std::size_t b = 0; b < h.occupancy.size(); ++b) {
      occ.push_back({{"spread", labels[b]}, {"fraction", h.occupancy[b]}, {"se", h.occupancy_se[b]}});
    }
    row["occupancy"] = std::move(occ);
    row["gaussianity"] = {{"skewness", h.gaussianity.skewness},
                          {"skewness_se", h.gaussianity.skewness_se},
                          {"excess_kurtosis", h.gaussianity.excess_kurtosis},
                          {"excess_kurtosis_se", h.gaussianity.excess_kurtosis_se},
                          {"ks_distance", h.gaussianity.ks_distance}};
    rows.push_back(std::move(row));
  }
  doc["horizons"] = std::move(rows);
  return doc.dump(2) + "\n";
}

void write_csv(std::ostream& out, const McSummary& summary) {
  out << "horizon,n_paths,drift_rate,drift_rate_se,var_rate,var_rate_se,mean_duration,"
         "mean_duration_se,occ_1,occ_2,occ_3,occ_4plus,skewness,excess_kurtosis,ks_distance\n"
      << std::setprecision(17);
  for (const HorizonSummary& h : summary.horizons) {
    out << h.horizon << ',' << h.n_paths << ',' << h.drift_rate << ',' << h.drift_rate_se << ','
        << h.var_rate << ',' << h.var_rate_se << ',' << h.mean_duration << ','
        << h.mean_duration_se;
    for (double o : h.occupancy) out << ',' << o;
    out << ',' << h.gaussianity.skewness << ',' << h.gaussianity.excess_kurtosis << ','
        << h.gaussianity.ks_distance << '\n';
  }
}

void write_density_csv(std::ostream& out, const HorizonSummary& summary) {
  out << "mid_half_ticks,empirical_density,normal_density\n" << std::setprecision(17);
  const auto& x = summary.final_mids;
  if (x.empty()) return;
  const auto [lo_it, hi_it] = std::minmax_element(x.begin(), x.end());
  const auto n = static_cast<double>(x.size());
  std::vector<double> sorted(x.begin(), x.end());
  std::sort(sorted.begin(), sorted.end());
  const double iqr = sorted[sorted.size() * 3 / 4] - sorted[sorted.size() / 4];
  // Freedman-Diaconis width, rounded to an even number of half-ticks so the
  // parity of s_t does not alias into the histogram.
  const double fd = 2.0 * iqr / std::cbrt(n);
  const std::int64_t width = std::max<std::int64_t>(2, 2 * static_cast<std::int64_t>(std::llround(fd / 2.0)));
  const std::int64_t lo = *lo_it;
  const std::size_t bins = static_cast<std::size_t>((*hi_it - lo) / width + 1);
  std::vector<std::size_t> counts(bins, 0);
  for (std::int64_t v : x) ++counts[static_cast<std::size_t>((v - lo) / width)];

  Moments m = moments(sorted);
  const double sd = std::sqrt(m.var);
  const double w = static_cast<double>(width);
  for (std::size_t b = 0; b < bins; ++b) {
    const double centre = static_cast<double>(lo) + (static_cast<double>(b) + 0.5) * w - 0.5;
    const double empirical = static_cast<double>(counts[b]) / (n * w);
    const double normal = sd > 0.0 ? std::exp(-0.5 * std::pow((centre - m.mean) / sd, 2)) /
                                         (sd * std::sqrt(2.0 * M_PI))
                                   : 0.0;
    out << centre << ',' << empirical << ',' << normal << '\n';
  }
}

void write_occupancy_csv(std::ostream& out, const HorizonSummary& summary) {
  out << "spread,fraction,std_error\n" << std::setprecision(17);
  const char* labels[] = {"1", "2", "3", "4+"};
  for (std::size_t b = 0; b < summary.occupancy.size(); ++b) {
    out << labels[b] << ',' << summary.occupancy[b] << ',' << summary.occupancy_se[b] << '\n';
  }
}

}  // namespace lobsim
