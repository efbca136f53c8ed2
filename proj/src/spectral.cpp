#include "lobsim/spectral.hpp"

#include "lobsim/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lobsim {

namespace {

void require_interior(const Spectrum& spec, QueuePair p) {
  if (!spec.lattice.interior(p)) {
    throw Error(ErrorCode::StartOnBoundary,
                "point (" + std::to_string(p.bid) + ", " + std::to_string(p.ask) +
                    ") is not interior to {1.." + std::to_string(spec.lattice.n_star()) + "}^2");
  }
}

void require_survivor(const Spectrum& spec, int level) {
  if (level < 1 || level > spec.lattice.n_star()) {
    throw Error(ErrorCode::InvalidArgument, "survivor size out of range: " + std::to_string(level));
  }
}

// chi^{(target_sum - start_sum) / 2}, in log space.
double chi_ratio(const Spectrum& spec, int target_sum, int start_sum) {
  return std::exp(0.5 * spec.log_chi * static_cast<double>(target_sum - start_sum));
}

// 1 - e^{-x} without cancellation for small x.
double one_minus_exp(double x) { return -std::expm1(-x); }

}  // namespace

Eigen::MatrixXd build_delta(const ModelParams& params) {
  const int n = params.n_star();
  const LatticeIndex lattice(n);
  const double cap = std::sqrt(params.lambda() / params.upsilon());
  Eigen::MatrixXd delta = Eigen::MatrixXd::Zero(lattice.size(), lattice.size());
  for (int b = 1; b <= n; ++b) {
    for (int a = 1; a <= n; ++a) {
      const int k = lattice.flat(b, a);
      delta(k, k) = -4.0 + (b == n ? cap : 0.0) + (a == n ? cap : 0.0);
      if (b < n) delta(k, lattice.flat(b + 1, a)) = 1.0;
      if (b > 1) delta(k, lattice.flat(b - 1, a)) = 1.0;
      if (a < n) delta(k, lattice.flat(b, a + 1)) = 1.0;
      if (a > 1) delta(k, lattice.flat(b, a - 1)) = 1.0;
    }
  }
  return delta;
}

Spectrum decompose(const Eigen::MatrixXd& delta, const ModelParams& params) {
  const int n = params.n_star();
  if (delta.rows() != n * n || delta.cols() != n * n) {
    throw Error(ErrorCode::InvalidArgument, "delta does not match n_star");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(delta);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::EigenSolverFailure, "symmetric eigensolver did not converge");
  }

  Spectrum spec;
  spec.xi = solver.eigenvalues();
  spec.basis = solver.eigenvectors();
  spec.lattice = LatticeIndex(n);
  for (Eigen::Index k = 0; k < spec.basis.cols(); ++k) {
    auto col = spec.basis.col(k);
    const double scale = col.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < col.size(); ++i) {
      if (std::abs(col(i)) > 1e-10 * scale) {
        if (col(i) < 0.0) col = -col;
        break;
      }
    }
  }

  spec.lambda = params.lambda();
  spec.upsilon = params.upsilon();
  spec.chi = spec.lambda / spec.upsilon;
  spec.log_chi = std::log(spec.lambda) - std::log(spec.upsilon);
  spec.sqrt_lu = std::sqrt(spec.lambda * spec.upsilon);
  // 2(lambda + upsilon) - (4 + xi) sqrt(lambda upsilon), without the cancellation.
  const double gap = std::sqrt(spec.lambda) - std::sqrt(spec.upsilon);
  spec.decay = (2.0 * gap * gap - spec.xi.array() * spec.sqrt_lu).matrix();
  if ((spec.decay.array() <= 0.0).any()) {
    throw Error(ErrorCode::InternalConsistency, "non-positive decay rate in spectrum");
  }
  return spec;
}

SpectrumDiagnostics diagnose(const Spectrum& spec, const Eigen::MatrixXd& delta) {
  SpectrumDiagnostics d;
  d.symmetry_residual = (delta - delta.transpose()).cwiseAbs().maxCoeff();
  const auto m = spec.basis.cols();
  d.orthonormality_residual =
      (spec.basis.transpose() * spec.basis - Eigen::MatrixXd::Identity(m, m)).cwiseAbs().maxCoeff();
  const double norm = std::max(delta.cwiseAbs().maxCoeff(), 1.0);
  const Eigen::MatrixXd residual = delta * spec.basis - spec.basis * spec.xi.asDiagonal();
  d.eigen_residual = residual.cwiseAbs().maxCoeff() / norm;
  d.max_eigenvalue = spec.xi.maxCoeff();
  d.min_decay_rate = spec.decay.minCoeff();
  return d;
}

double checked_probability(double raw) {
  if (!(raw >= -1e-8 && raw <= 1.0 + 1e-8)) {
    throw Error(ErrorCode::InternalConsistency,
                "probability out of range: " + std::to_string(raw));
  }
  return std::clamp(raw, 0.0, 1.0);
}

QueuePair entry_point(BoundaryState target) {
  return target.depleted == Side::Ask ? QueuePair{target.survivor, 1}
                                      : QueuePair{1, target.survivor};
}

Eigen::VectorXd boundary_flux_coefficients(const Spectrum& spec, QueuePair start,
                                           BoundaryState target) {
  require_interior(spec, start);
  require_survivor(spec, target.survivor);
  const QueuePair entry = entry_point(target);
  // Exit point has coordinate sum = survivor; the flux into it is upsilon times
  // the kernel at `entry`, whose symmetrization factor is chi^{1/2} higher.
  const double pref = spec.sqrt_lu * chi_ratio(spec, target.survivor, start.bid + start.ask);
  const auto from = spec.basis.row(spec.lattice.flat(start));
  const auto to = spec.basis.row(spec.lattice.flat(entry));
  return (pref * from.array() * to.array()).matrix().transpose();
}

Eigen::VectorXd occupancy_coefficients(const Spectrum& spec, QueuePair start, Side survivor_side,
                                       int level) {
  require_interior(spec, start);
  require_survivor(spec, level);
  const int n = spec.lattice.n_star();
  const int start_sum = start.bid + start.ask;
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(spec.basis.cols());
  for (int other = 1; other <= n; ++other) {
    const QueuePair q = survivor_side == Side::Ask ? QueuePair{other, level} : QueuePair{level, other};
    acc += chi_ratio(spec, q.bid + q.ask, start_sum) *
           spec.basis.row(spec.lattice.flat(q)).transpose();
  }
  return (acc.array() * spec.basis.row(spec.lattice.flat(start)).transpose().array()).matrix();
}

double u_joint(const Spectrum& spec, const ModelParams&, double t, QueuePair start,
               BoundaryState target) {
  if (!(t >= 0.0)) throw Error(ErrorCode::InvalidArgument, "t must be >= 0");
  const Eigen::VectorXd c = boundary_flux_coefficients(spec, start, target);
  double sum = 0.0;
  if (std::isinf(t)) {
    for (Eigen::Index k = 0; k < c.size(); ++k) sum += c(k) / spec.decay(k);
  } else {
    for (Eigen::Index k = 0; k < c.size(); ++k) {
      sum += c(k) * one_minus_exp(t * spec.decay(k)) / spec.decay(k);
    }
  }
  return checked_probability(sum);
}

double survival_kernel(const Spectrum& spec, const ModelParams&, double t, QueuePair start,
                       QueuePair at) {
  if (!(t >= 0.0)) throw Error(ErrorCode::InvalidArgument, "t must be >= 0");
  require_interior(spec, start);
  require_interior(spec, at);
  const auto from = spec.basis.row(spec.lattice.flat(start));
  const auto to = spec.basis.row(spec.lattice.flat(at));
  double sum = 0.0;
  for (Eigen::Index k = 0; k < spec.basis.cols(); ++k) {
    sum += std::exp(-t * spec.decay(k)) * from(k) * to(k);
  }
  return checked_probability(chi_ratio(spec, at.bid + at.ask, start.bid + start.ask) * sum);
}

namespace {

// Sum over every exit of the flux coefficients.
Eigen::VectorXd total_flux(const Spectrum& spec, QueuePair start) {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(spec.basis.cols());
  for (int w = 1; w <= spec.lattice.n_star(); ++w) {
    c += boundary_flux_coefficients(spec, start, {Side::Ask, w});
    c += boundary_flux_coefficients(spec, start, {Side::Bid, w});
  }
  return c;
}

void require_time_state(const ModelParams& params, double t, const BookState& state) {
  if (!(t >= 0.0)) throw Error(ErrorCode::InvalidArgument, "t must be >= 0");
  validate_state(params, state);
}

}  // namespace

double tau_cdf(const Spectrum& spec, const ModelParams& params, double t, const BookState& state) {
  require_time_state(params, t, state);
  if (std::isinf(t)) return 1.0;
  const Eigen::VectorXd c = total_flux(spec, {state.bid, state.ask});
  double depleted = 0.0;
  for (Eigen::Index k = 0; k < c.size(); ++k) {
    depleted += c(k) * one_minus_exp(t * spec.decay(k)) / spec.decay(k);
  }
  depleted = checked_probability(depleted);
  if (state.spread == 1) return depleted;
  const double survive_arrival = std::exp(-2.0 * params.alpha() * t);
  return checked_probability((1.0 - survive_arrival) + depleted * survive_arrival);
}

double tau_density(const Spectrum& spec, const ModelParams& params, double t,
                   const BookState& state) {
  require_time_state(params, t, state);
  if (std::isinf(t)) return 0.0;
  const Eigen::VectorXd c = total_flux(spec, {state.bid, state.ask});
  double density = 0.0;
  double depleted = 0.0;
  for (Eigen::Index k = 0; k < c.size(); ++k) {
    density += c(k) * std::exp(-t * spec.decay(k));
    depleted += c(k) * one_minus_exp(t * spec.decay(k)) / spec.decay(k);
  }
  density = std::max(density, 0.0);
  if (state.spread == 1) return density;
  const double rate = 2.0 * params.alpha();
  const double survive_arrival = std::exp(-rate * t);
  return rate * survive_arrival * (1.0 - checked_probability(depleted)) + survive_arrival * density;
}

double exp_killed_depletion(const Spectrum& spec, const ModelParams&, double rate,
                            QueuePair start, BoundaryState target) {
  if (!(rate > 0.0)) throw Error(ErrorCode::InvalidArgument, "killing rate must be positive");
  const Eigen::VectorXd c = boundary_flux_coefficients(spec, start, target);
  double sum = 0.0;
  for (Eigen::Index k = 0; k < c.size(); ++k) sum += c(k) / (rate + spec.decay(k));
  return checked_probability(sum);
}

double exp_window_occupancy(const Spectrum& spec, const ModelParams&, double rate,
                            QueuePair start, Side survivor_side, int level) {
  if (!(rate > 0.0)) throw Error(ErrorCode::InvalidArgument, "killing rate must be positive");
  const Eigen::VectorXd d = occupancy_coefficients(spec, start, survivor_side, level);
  double sum = 0.0;
  for (Eigen::Index k = 0; k < d.size(); ++k) sum += d(k) * rate / (rate + spec.decay(k));
  return checked_probability(0.5 * sum);
}

}  // namespace lobsim
