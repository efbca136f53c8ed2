#include "lobsim/lobsim.h"

#include "lobsim/analytics.hpp"
#include "lobsim/diffusion_lab.hpp"
#include "lobsim/error.hpp"
#include "lobsim/event_oracle.hpp"
#include "lobsim/fast_simulator.hpp"

#include <fstream>
#include <iostream>
#include <memory>
#include <new>
#include <string>

using namespace lobsim;

struct lobsim_model {
  ModelParams params;
  std::shared_ptr<const Spectrum> spectrum;
  Eigen::MatrixXd delta;
  std::unique_ptr<FastSimulator> fast;
};

struct lobsim_path {
  PathRecord record;
};

struct lobsim_study {
  McSummary summary;
};

namespace {

thread_local std::string last_error;

lobsim_status to_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return LOBSIM_INVALID_ARGUMENT;
    case ErrorCode::NonPositiveRate: return LOBSIM_NON_POSITIVE_RATE;
    case ErrorCode::BadResetDistribution: return LOBSIM_BAD_RESET_DISTRIBUTION;
    case ErrorCode::NStarTooSmall: return LOBSIM_NSTAR_TOO_SMALL;
    case ErrorCode::StartOnBoundary: return LOBSIM_START_ON_BOUNDARY;
    case ErrorCode::ConfigError: return LOBSIM_CONFIG_ERROR;
    case ErrorCode::IoError: return LOBSIM_IO_ERROR;
    case ErrorCode::EigenSolverFailure: return LOBSIM_EIGEN_SOLVER_FAILURE;
    case ErrorCode::BisectionNoConvergence: return LOBSIM_BISECTION_NO_CONVERGENCE;
    case ErrorCode::InternalConsistency: return LOBSIM_INTERNAL_CONSISTENCY;
  }
  return LOBSIM_UNKNOWN_ERROR;
}

// Runs `body`, translating exceptions into status codes and the thread-local message.
template <class F>
lobsim_status guarded(F&& body) {
  try {
    body();
    last_error.clear();
    return LOBSIM_OK;
  } catch (const Error& e) {
    last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return LOBSIM_OUT_OF_MEMORY;
  } catch (const std::exception& e) {
    last_error = e.what();
    return LOBSIM_UNKNOWN_ERROR;
  } catch (...) {
    last_error = "unknown error";
    return LOBSIM_UNKNOWN_ERROR;
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::InvalidArgument, what);
}

BookState to_state(lobsim_state s) { return {s.bid, s.ask, s.spread}; }

lobsim_state from_state(const BookState& s) { return {s.bid, s.ask, s.spread}; }

// Output target for the writers; "-" means the process stdout.
class Sink {
 public:
  explicit Sink(const char* file) : name_(file ? file : "") {
    require(file != nullptr, "null output path");
    if (name_ != "-") {
      file_.open(name_, std::ios::binary);
      if (!file_) throw Error(ErrorCode::IoError, "cannot open for writing: " + name_);
    }
  }
  std::ostream& stream() { return name_ == "-" ? std::cout : file_; }
  void close() {
    if (name_ == "-") {
      std::cout.flush();
      if (!std::cout) throw Error(ErrorCode::IoError, "write to stdout failed");
      return;
    }
    file_.close();
    if (!file_) throw Error(ErrorCode::IoError, "write failed: " + name_);
  }

 private:
  std::string name_;
  std::ofstream file_;
};

lobsim_model* make_model(const ModelParams& params) {
  auto model = std::make_unique<lobsim_model>(lobsim_model{params, nullptr, build_delta(params), nullptr});
  model->spectrum = std::make_shared<const Spectrum>(decompose(model->delta, params));
  model->fast = std::make_unique<FastSimulator>(params, model->spectrum);
  return model.release();
}

const HorizonSummary& horizon_at(const lobsim_study* study, std::size_t index) {
  require(study != nullptr, "null study");
  require(index < study->summary.horizons.size(), "horizon index out of range");
  return study->summary.horizons[index];
}

}  // namespace

extern "C" {

const char* lobsim_last_error(void) { return last_error.c_str(); }

const char* lobsim_status_name(lobsim_status status) {
  switch (status) {
    case LOBSIM_OK: return "Ok";
    case LOBSIM_INVALID_ARGUMENT: return "InvalidArgument";
    case LOBSIM_NON_POSITIVE_RATE: return "NonPositiveRate";
    case LOBSIM_BAD_RESET_DISTRIBUTION: return "BadResetDistribution";
    case LOBSIM_NSTAR_TOO_SMALL: return "NStarTooSmall";
    case LOBSIM_START_ON_BOUNDARY: return "StartOnBoundary";
    case LOBSIM_CONFIG_ERROR: return "ConfigError";
    case LOBSIM_IO_ERROR: return "IoError";
    case LOBSIM_EIGEN_SOLVER_FAILURE: return "EigenSolverFailure";
    case LOBSIM_BISECTION_NO_CONVERGENCE: return "BisectionNoConvergence";
    case LOBSIM_INTERNAL_CONSISTENCY: return "InternalConsistency";
    case LOBSIM_OUT_OF_MEMORY: return "OutOfMemory";
    case LOBSIM_UNKNOWN_ERROR: return "UnknownError";
  }
  return "UnknownError";
}

int lobsim_status_is_numerical(lobsim_status status) {
  return status == LOBSIM_EIGEN_SOLVER_FAILURE || status == LOBSIM_BISECTION_NO_CONVERGENCE ||
         status == LOBSIM_INTERNAL_CONSISTENCY;
}

lobsim_status lobsim_model_create(const lobsim_params* params, lobsim_model** out) {
  return guarded([&] {
    require(params != nullptr && out != nullptr, "null argument");
    RawParams raw{params->lambda, params->mu, params->theta, params->alpha, params->n_star, {}};
    if (params->reset_dist != nullptr) {
      raw.reset_dist.assign(params->reset_dist, params->reset_dist + params->reset_len);
    }
    *out = make_model(validate_params(raw));
  });
}

lobsim_status lobsim_model_from_config(const char* path, lobsim_model** out, lobsim_state* initial,
                                       int* has_initial) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null argument");
    const ModelConfig config = load_config(path);
    const ModelParams params = validate_params(config.raw);
    if (config.initial) validate_state(params, *config.initial);
    *out = make_model(params);
    if (has_initial) *has_initial = config.initial ? 1 : 0;
    if (initial && config.initial) *initial = from_state(*config.initial);
  });
}

void lobsim_model_destroy(lobsim_model* model) { delete model; }

int lobsim_model_n_star(const lobsim_model* model) { return model ? model->params.n_star() : 0; }

int lobsim_model_recurrence_ok(const lobsim_model* model) {
  return model && model->params.recurrence_ok() ? 1 : 0;
}

size_t lobsim_spectrum_size(const lobsim_model* model) {
  return model ? static_cast<size_t>(model->spectrum->xi.size()) : 0;
}

lobsim_status lobsim_spectrum_eigenvalues(const lobsim_model* model, double* out, size_t capacity) {
  return guarded([&] {
    require(model != nullptr && out != nullptr, "null argument");
    const auto& xi = model->spectrum->xi;
    for (size_t k = 0; k < capacity && k < static_cast<size_t>(xi.size()); ++k) out[k] = xi[static_cast<Eigen::Index>(k)];
  });
}

lobsim_status lobsim_spectrum_decay_rates(const lobsim_model* model, double* out, size_t capacity) {
  return guarded([&] {
    require(model != nullptr && out != nullptr, "null argument");
    const auto& r = model->spectrum->decay;
    for (size_t k = 0; k < capacity && k < static_cast<size_t>(r.size()); ++k) out[k] = r[static_cast<Eigen::Index>(k)];
  });
}

lobsim_status lobsim_spectrum_diagnose(const lobsim_model* model, lobsim_spectrum_diagnostics* out) {
  return guarded([&] {
    require(model != nullptr && out != nullptr, "null argument");
    const SpectrumDiagnostics d = diagnose(*model->spectrum, model->delta);
    *out = {d.symmetry_residual, d.orthonormality_residual, d.eigen_residual, d.max_eigenvalue,
            d.min_decay_rate};
  });
}

lobsim_status lobsim_u_joint(const lobsim_model* model, double t, int bid, int ask,
                             lobsim_side depleted, int survivor, double* out) {
  return guarded([&] {
    require(model != nullptr && out != nullptr, "null argument");
    const Side side = depleted == LOBSIM_SIDE_BID ? Side::Bid : Side::Ask;
    *out = u_joint(*model->spectrum, model->params, t, {bid, ask}, {side, survivor});
  });
}

lobsim_status lobsim_survival_kernel(const lobsim_model* model, double t, int bid, int ask,
                                     int at_bid, int at_ask, double* out) {
  return guarded([&] {
    require(model != nullptr && out != nullptr, "null argument");
    *out = survival_kernel(*model->spectrum, model->params, t, {bid, ask}, {at_bid, at_ask});
  });
}

lobsim_status lobsim_tau_cdf(const lobsim_model* model, double t, lobsim_state state, double* out) {
  return guarded([&] {
    require(model != nullptr && out != nullptr, "null argument");
    *out = tau_cdf(*model->spectrum, model->params, t, to_state(state));
  });
}

lobsim_status lobsim_tau_density(const lobsim_model* model, double t, lobsim_state state,
                                 double* out) {
  return guarded([&] {
    require(model != nullptr && out != nullptr, "null argument");
    *out = tau_density(*model->spectrum, model->params, t, to_state(state));
  });
}

lobsim_status lobsim_tau_curves_write_csv(const lobsim_model* model, lobsim_state state,
                                          const double* grid, size_t n, const char* path) {
  return guarded([&] {
    require(model != nullptr && (grid != nullptr || n == 0), "null argument");
    const CurveTable table = tau_curves(*model->spectrum, model->params, to_state(state),
                                        std::vector<double>(grid, grid + n));
    Sink out(path);
    write_csv(out.stream(), table);
    out.close();
  });
}

lobsim_status lobsim_prob_up(const lobsim_model* model, lobsim_state state, double* out) {
  return guarded([&] {
    require(model != nullptr && out != nullptr, "null argument");
    *out = prob_up(*model->spectrum, model->params, to_state(state));
  });
}

lobsim_status lobsim_prob_two_up(const lobsim_model* model, lobsim_state state, double* out) {
  return guarded([&] {
    require(model != nullptr && out != nullptr, "null argument");
    *out = prob_two_up(*model->spectrum, model->params, to_state(state));
  });
}

lobsim_status lobsim_recurrence_report(const lobsim_model* model, lobsim_recurrence* out) {
  return guarded([&] {
    require(model != nullptr && out != nullptr, "null argument");
    const RecurrenceReport r = recurrence_report(*model->spectrum, model->params);
    *out = {r.p_one, r.p_nstar, r.theta, static_cast<int>(r.regime), r.condition_ok ? 1 : 0,
            r.p_one_lt_half ? 1 : 0};
  });
}

lobsim_status lobsim_simulate(const lobsim_model* model, lobsim_engine engine, lobsim_state initial,
                              double horizon, uint64_t seed, const char* event_log_path,
                              lobsim_path** out) {
  return guarded([&] {
    require(model != nullptr && out != nullptr, "null argument");
    require(engine == LOBSIM_ENGINE_FAST || engine == LOBSIM_ENGINE_ORACLE, "unknown engine");
    require(event_log_path == nullptr || engine == LOBSIM_ENGINE_ORACLE,
            "event logs require the oracle engine");
    auto path = std::make_unique<lobsim_path>();
    if (engine == LOBSIM_ENGINE_FAST) {
      path->record = model->fast->simulate_path(to_state(initial), horizon, seed);
    } else {
      const EventOracle oracle(model->params);
      EventTrace trace =
          oracle.simulate_events(to_state(initial), horizon, seed, 0, event_log_path != nullptr);
      if (event_log_path) {
        Sink log(event_log_path);
        write_csv(log.stream(), trace.log);
        log.close();
      }
      path->record = std::move(trace.path);
    }
    *out = path.release();
  });
}

void lobsim_path_destroy(lobsim_path* path) { delete path; }

size_t lobsim_path_changes(const lobsim_path* path) { return path ? path->record.changes() : 0; }

int64_t lobsim_path_final_mid(const lobsim_path* path) {
  return path ? path->record.final_mid() : 0;
}

lobsim_status lobsim_path_epoch(const lobsim_path* path, size_t index, double* time, int64_t* mid,
                                lobsim_state* state) {
  return guarded([&] {
    require(path != nullptr, "null path");
    require(index < path->record.epochs.size(), "epoch index out of range");
    const PathEpoch& e = path->record.epochs[index];
    if (time) *time = e.time;
    if (mid) *mid = e.mid;
    if (state) *state = {e.bid, e.ask, e.spread};
  });
}

lobsim_status lobsim_path_occupancy(const lobsim_path* path, double out[4]) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null argument");
    const SpreadOccupancy occ = occupancy(path->record);
    for (std::size_t b = 0; b < occ.size(); ++b) out[b] = occ[b];
  });
}

lobsim_status lobsim_path_write_csv(const lobsim_path* path, const char* file) {
  return guarded([&] {
    require(path != nullptr, "null path");
    Sink out(file);
    write_csv(out.stream(), path->record);
    out.close();
  });
}

lobsim_status lobsim_study_run(const lobsim_model* model, lobsim_engine engine, lobsim_state initial,
                               const double* horizons, size_t n_horizons, size_t n_paths,
                               uint64_t seed, unsigned workers, lobsim_study** out) {
  return guarded([&] {
    require(model != nullptr && out != nullptr && (horizons != nullptr || n_horizons == 0),
            "null argument");
    require(engine == LOBSIM_ENGINE_FAST || engine == LOBSIM_ENGINE_ORACLE, "unknown engine");
    McStudyConfig config;
    config.initial = to_state(initial);
    config.horizons.assign(horizons, horizons + n_horizons);
    config.n_paths = n_paths;
    config.seed = seed;
    config.engine = engine == LOBSIM_ENGINE_FAST ? Engine::Fast : Engine::Oracle;
    config.workers = workers;
    auto study = std::make_unique<lobsim_study>();
    study->summary = run_study(model->params, config, model->fast.get());
    *out = study.release();
  });
}

void lobsim_study_destroy(lobsim_study* study) { delete study; }

size_t lobsim_study_horizon_count(const lobsim_study* study) {
  return study ? study->summary.horizons.size() : 0;
}

lobsim_status lobsim_study_horizon(const lobsim_study* study, size_t index,
                                   lobsim_horizon_summary* out) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    const HorizonSummary& h = horizon_at(study, index);
    lobsim_horizon_summary s{};
    s.horizon = h.horizon;
    s.n_paths = h.n_paths;
    s.drift_rate = h.drift_rate;
    s.drift_rate_se = h.drift_rate_se;
    s.var_rate = h.var_rate;
    s.var_rate_se = h.var_rate_se;
    s.mean_duration = h.mean_duration;
    s.mean_duration_se = h.mean_duration_se;
    s.paths_without_change = h.paths_without_change;
    for (std::size_t b = 0; b < 4; ++b) {
      s.occupancy[b] = h.occupancy[b];
      s.occupancy_se[b] = h.occupancy_se[b];
    }
    s.skewness = h.gaussianity.skewness;
    s.skewness_se = h.gaussianity.skewness_se;
    s.excess_kurtosis = h.gaussianity.excess_kurtosis;
    s.excess_kurtosis_se = h.gaussianity.excess_kurtosis_se;
    s.ks_distance = h.gaussianity.ks_distance;
    *out = s;
  });
}

lobsim_status lobsim_study_write_json(const lobsim_study* study, const char* file) {
  return guarded([&] {
    require(study != nullptr, "null study");
    Sink out(file);
    out.stream() << to_json(study->summary);
    out.close();
  });
}

lobsim_status lobsim_study_write_csv(const lobsim_study* study, const char* file) {
  return guarded([&] {
    require(study != nullptr, "null study");
    Sink out(file);
    write_csv(out.stream(), study->summary);
    out.close();
  });
}

lobsim_status lobsim_study_write_density_csv(const lobsim_study* study, size_t index,
                                             const char* file) {
  return guarded([&] {
    const HorizonSummary& h = horizon_at(study, index);
    Sink out(file);
    write_density_csv(out.stream(), h);
    out.close();
  });
}

lobsim_status lobsim_study_write_occupancy_csv(const lobsim_study* study, size_t index,
                                               const char* file) {
  return guarded([&] {
    const HorizonSummary& h = horizon_at(study, index);
    Sink out(file);
    write_occupancy_csv(out.stream(), h);
    out.close();
  });
}

lobsim_status lobsim_study_fclt(const lobsim_study* study, size_t shorter, size_t longer,
                                lobsim_fclt* out) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    const FcltReport r = fclt_check(horizon_at(study, shorter), horizon_at(study, longer));
    *out = {r.ratio, r.ratio_se, r.ratio_lo, r.ratio_hi, r.ratio_contains_one ? 1 : 0,
            r.drift_diff, r.drift_diff_se, r.drift_contains_zero ? 1 : 0};
  });
}

}  // extern "C"
