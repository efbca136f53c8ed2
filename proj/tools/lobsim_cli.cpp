// Command-line front end. Uses only the C API in lobsim.h.
#include "lobsim/lobsim.h"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

struct Failure {
  int exit_code;
  std::string message;
};

void check(lobsim_status status) {
  if (status == LOBSIM_OK) return;
  throw Failure{lobsim_status_is_numerical(status) ? kExitNumerical : kExitValidation,
                std::string(lobsim_status_name(status)) + ": " + lobsim_last_error()};
}

[[noreturn]] void invalid(const std::string& message) { throw Failure{kExitValidation, message}; }

struct ModelDeleter {
  void operator()(lobsim_model* m) const { lobsim_model_destroy(m); }
};
struct PathDeleter {
  void operator()(lobsim_path* p) const { lobsim_path_destroy(p); }
};
struct StudyDeleter {
  void operator()(lobsim_study* s) const { lobsim_study_destroy(s); }
};
using ModelPtr = std::unique_ptr<lobsim_model, ModelDeleter>;
using PathPtr = std::unique_ptr<lobsim_path, PathDeleter>;
using StudyPtr = std::unique_ptr<lobsim_study, StudyDeleter>;

struct Options {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::size_t n_paths = 1000;
  std::string horizon;
  std::string state;
  std::string t_grid;
  std::string engine = "fast";
  unsigned workers = 1;
  std::string events;
};

struct Loaded {
  ModelPtr model;
  std::optional<lobsim_state> initial;
};

Loaded load(const Options& o) {
  lobsim_model* raw = nullptr;
  lobsim_state initial{};
  int has_initial = 0;
  check(lobsim_model_from_config(o.config.c_str(), &raw, &initial, &has_initial));
  Loaded l{ModelPtr(raw), std::nullopt};
  if (has_initial) l.initial = initial;
  return l;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, sep)) parts.push_back(item);
  return parts;
}

double parse_double(const std::string& s, const char* what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    invalid(std::string("bad ") + what + ": '" + s + "'");
  }
}

int parse_int(const std::string& s, const char* what) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    invalid(std::string("bad ") + what + ": '" + s + "'");
  }
}

lobsim_state parse_state(const std::string& text) {
  const auto parts = split(text, ',');
  if (parts.size() != 3) invalid("--state expects bid,ask,spread");
  return {parse_int(parts[0], "bid"), parse_int(parts[1], "ask"), parse_int(parts[2], "spread")};
}

// Explicit --state wins over the config's initial state.
std::optional<lobsim_state> chosen_state(const Options& o, const Loaded& l) {
  if (!o.state.empty()) return parse_state(o.state);
  return l.initial;
}

lobsim_state required_state(const Options& o, const Loaded& l) {
  const auto s = chosen_state(o, l);
  if (!s) invalid("no state: pass --state or set x0_bid, x0_ask, spread0 in the config");
  return *s;
}

std::vector<double> parse_horizons(const std::string& text) {
  if (text.empty()) invalid("--horizon is required");
  std::vector<double> h;
  for (const auto& part : split(text, ',')) h.push_back(parse_double(part, "horizon"));
  return h;
}

std::vector<double> parse_grid(const std::string& text) {
  const auto parts = split(text, ':');
  if (parts.size() != 3) invalid("--t-grid expects start:stop:step");
  const double start = parse_double(parts[0], "grid start");
  const double stop = parse_double(parts[1], "grid stop");
  const double step = parse_double(parts[2], "grid step");
  if (!(step > 0.0) || start < 0.0 || stop < start) invalid("--t-grid needs 0 <= start <= stop, step > 0");
  const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
  if (n > 10'000'000) invalid("--t-grid has too many points");
  std::vector<double> grid(n);
  for (std::size_t i = 0; i < n; ++i) grid[i] = start + static_cast<double>(i) * step;
  return grid;
}

lobsim_engine parse_engine(const std::string& name) {
  return name == "oracle" ? LOBSIM_ENGINE_ORACLE : LOBSIM_ENGINE_FAST;
}

std::uint64_t required_seed(const Options& o) {
  if (!o.seed) invalid("--seed is required for this subcommand");
  return *o.seed;
}

// Writes to --out, or stdout when no path was given.
class Output {
 public:
  explicit Output(const std::string& path) : path_(path) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_) invalid("cannot open output file: " + path);
    }
  }
  std::ostream& stream() { return path_.empty() ? std::cout : file_; }
  void finish() {
    stream().flush();
    if (!stream()) invalid("write failed: " + (path_.empty() ? std::string("stdout") : path_));
  }

 private:
  std::string path_;
  std::ofstream file_;
};

std::string out_path(const Options& o) { return o.out.empty() ? "-" : o.out; }

int cmd_spectrum(const Options& o) {
  Loaded l = load(o);
  const std::size_t n = lobsim_spectrum_size(l.model.get());
  std::vector<double> xi(n), decay(n);
  check(lobsim_spectrum_eigenvalues(l.model.get(), xi.data(), n));
  check(lobsim_spectrum_decay_rates(l.model.get(), decay.data(), n));
  lobsim_spectrum_diagnostics d{};
  check(lobsim_spectrum_diagnose(l.model.get(), &d));
  Output out(o.out);
  out.stream() << "k,xi,decay_rate\n" << std::setprecision(17);
  for (std::size_t k = 0; k < n; ++k) out.stream() << k << ',' << xi[k] << ',' << decay[k] << '\n';
  out.finish();
  std::cerr << std::setprecision(6) << "symmetry_residual=" << d.symmetry_residual
            << " orthonormality_residual=" << d.orthonormality_residual
            << " eigen_residual=" << d.eigen_residual << " max_eigenvalue=" << d.max_eigenvalue
            << " min_decay_rate=" << d.min_decay_rate << '\n';
  return 0;
}

int cmd_tau_dist(const Options& o) {
  Loaded l = load(o);
  const lobsim_state state = required_state(o, l);
  if (o.t_grid.empty()) invalid("--t-grid is required for tau-dist");
  const std::vector<double> grid = parse_grid(o.t_grid);
  check(lobsim_tau_curves_write_csv(l.model.get(), state, grid.data(), grid.size(),
                                    out_path(o).c_str()));
  return 0;
}

// Without a state, tabulates every (bid, ask) at spreads 1 and 2.
int cmd_probability(const Options& o, bool two_up) {
  Loaded l = load(o);
  std::vector<lobsim_state> states;
  if (const auto s = chosen_state(o, l)) {
    states.push_back(*s);
  } else {
    const int n = lobsim_model_n_star(l.model.get());
    for (int z = 1; z <= 2; ++z)
      for (int b = 1; b <= n; ++b)
        for (int a = 1; a <= n; ++a) states.push_back({b, a, z});
  }
  Output out(o.out);
  out.stream() << "bid,ask,spread," << (two_up ? "prob_two_up" : "prob_up") << '\n'
               << std::setprecision(17);
  for (const lobsim_state& s : states) {
    double p = 0.0;
    check(two_up ? lobsim_prob_two_up(l.model.get(), s, &p) : lobsim_prob_up(l.model.get(), s, &p));
    out.stream() << s.bid << ',' << s.ask << ',' << s.spread << ',' << p << '\n';
  }
  out.finish();
  return 0;
}

int cmd_simulate(const Options& o) {
  const std::uint64_t seed = required_seed(o);
  Loaded l = load(o);
  const lobsim_state state = required_state(o, l);
  const auto horizons = parse_horizons(o.horizon);
  if (horizons.size() != 1) invalid("simulate takes a single --horizon");
  const lobsim_engine engine = parse_engine(o.engine);
  if (!o.events.empty() && engine != LOBSIM_ENGINE_ORACLE) invalid("--events requires --engine oracle");
  lobsim_path* raw = nullptr;
  check(lobsim_simulate(l.model.get(), engine, state, horizons[0], seed,
                        o.events.empty() ? nullptr : o.events.c_str(), &raw));
  PathPtr path(raw);
  check(lobsim_path_write_csv(path.get(), out_path(o).c_str()));
  return 0;
}

StudyPtr run_study(const Options& o, const Loaded& l, const std::vector<double>& horizons) {
  const std::uint64_t seed = required_seed(o);
  const lobsim_state state = required_state(o, l);
  if (o.workers < 1) invalid("--workers must be >= 1");
  lobsim_study* raw = nullptr;
  check(lobsim_study_run(l.model.get(), parse_engine(o.engine), state, horizons.data(),
                         horizons.size(), o.n_paths, seed, o.workers, &raw));
  return StudyPtr(raw);
}

// Writes PREFIX.json, PREFIX.csv and PREFIX.density_<i>.csv per horizon;
// JSON goes to stdout when --out is absent.
int cmd_mc_study(const Options& o) {
  required_seed(o);
  Loaded l = load(o);
  const auto horizons = parse_horizons(o.horizon);
  StudyPtr study = run_study(o, l, horizons);
  if (o.out.empty()) {
    check(lobsim_study_write_json(study.get(), "-"));
    return 0;
  }
  check(lobsim_study_write_json(study.get(), (o.out + ".json").c_str()));
  check(lobsim_study_write_csv(study.get(), (o.out + ".csv").c_str()));
  for (std::size_t i = 0; i < horizons.size(); ++i) {
    const std::string file = o.out + ".density_" + std::to_string(i) + ".csv";
    check(lobsim_study_write_density_csv(study.get(), i, file.c_str()));
  }
  return 0;
}

int cmd_occupancy(const Options& o) {
  required_seed(o);
  Loaded l = load(o);
  const auto horizons = parse_horizons(o.horizon.empty() ? "300" : o.horizon);
  if (horizons.size() != 1) invalid("occupancy takes a single --horizon");
  StudyPtr study = run_study(o, l, horizons);
  check(lobsim_study_write_occupancy_csv(study.get(), 0, out_path(o).c_str()));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lobsim: one-level limit order book model with variable spread"};
  app.require_subcommand(1);
  Options o;

  const auto add_config = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "Model config file (key=value)")->required();
    sub->add_option("--out", o.out, "Output path (stdout if omitted)");
  };
  const auto add_state = [&](CLI::App* sub) {
    sub->add_option("--state", o.state, "Book state bid,ask,spread (overrides the config)");
  };
  const auto add_sim = [&](CLI::App* sub) {
    sub->add_option("--seed", o.seed, "RNG seed (required)");
    sub->add_option("--engine", o.engine, "Simulator engine")
        ->check(CLI::IsMember({"fast", "oracle"}))
        ->default_str("fast");
  };
  const auto add_study = [&](CLI::App* sub) {
    sub->add_option("--n-paths", o.n_paths, "Paths per horizon")->default_str("1000");
    sub->add_option("--workers", o.workers, "Worker threads; results do not depend on it")
        ->default_str("1");
  };

  auto* spectrum = app.add_subcommand("spectrum", "Eigenvalues and decay rates of the operator");
  add_config(spectrum);

  auto* tau = app.add_subcommand("tau-dist", "Survival and density of the time to the next price change");
  add_config(tau);
  add_state(tau);
  tau->add_option("--t-grid", o.t_grid, "Time grid start:stop:step (sec)");

  auto* up = app.add_subcommand("prob-up", "Probability that the next price move is up");
  add_config(up);
  add_state(up);

  auto* upup = app.add_subcommand("prob-upup", "Probability of two consecutive up moves");
  add_config(upup);
  add_state(upup);

  auto* simulate = app.add_subcommand("simulate", "Simulate one price path");
  add_config(simulate);
  add_state(simulate);
  add_sim(simulate);
  simulate->add_option("--horizon", o.horizon, "Horizon (sec)");
  simulate->add_option("--events", o.events, "Per-event CSV (oracle engine only)");

  auto* study = app.add_subcommand("mc-study", "Monte Carlo study over one or more horizons");
  add_config(study);
  add_state(study);
  add_sim(study);
  add_study(study);
  study->add_option("--horizon", o.horizon, "Comma-separated increasing horizons (sec)");

  auto* occ = app.add_subcommand("occupancy", "Time-weighted spread occupancy");
  add_config(occ);
  add_state(occ);
  add_sim(occ);
  add_study(occ);
  occ->add_option("--horizon", o.horizon, "Horizon (sec)")->default_str("300");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (*spectrum) return cmd_spectrum(o);
    if (*tau) return cmd_tau_dist(o);
    if (*up) return cmd_probability(o, false);
    if (*upup) return cmd_probability(o, true);
    if (*simulate) return cmd_simulate(o);
    if (*study) return cmd_mc_study(o);
    if (*occ) return cmd_occupancy(o);
  } catch (const Failure& f) {
    std::cerr << "error: " << f.message << '\n';
    return f.exit_code;
  }
  return kExitValidation;
}
