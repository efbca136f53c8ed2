#pragma once

#include "lobsim/model.hpp"

#include <Eigen/Dense>

#include <limits>
#include <utility>

namespace lobsim {

inline constexpr double kInfiniteTime = std::numeric_limits<double>::infinity();

enum class Side { Bid, Ask };

inline Side opposite(Side s) noexcept { return s == Side::Bid ? Side::Ask : Side::Bid; }

// Interior point (bid, ask) of the two-queue lattice.
struct QueuePair {
  int bid = 1;
  int ask = 1;

  friend bool operator==(const QueuePair&, const QueuePair&) = default;
};

// Flat index k = (bid - 1) * n_star + (ask - 1) over {1..n_star}^2.
class LatticeIndex {
 public:
  explicit LatticeIndex(int n_star = 1) : n_star_(n_star) {}

  int n_star() const noexcept { return n_star_; }
  int size() const noexcept { return n_star_ * n_star_; }
  int flat(int bid, int ask) const noexcept { return (bid - 1) * n_star_ + (ask - 1); }
  int flat(QueuePair p) const noexcept { return flat(p.bid, p.ask); }
  QueuePair point(int k) const noexcept { return {k / n_star_ + 1, k % n_star_ + 1}; }
  bool interior(QueuePair p) const noexcept {
    return p.bid >= 1 && p.bid <= n_star_ && p.ask >= 1 && p.ask <= n_star_;
  }

 private:
  int n_star_;
};

// Absorbing point of the killed chain: which queue emptied, and the size of
// the other queue at that instant. (AskDepleted, w) is the lattice point (w, 0).
struct BoundaryState {
  Side depleted = Side::Ask;
  int survivor = 1;
};

// Eigen-decomposition of the symmetrized killed generator, plus the scalars
// needed to undo the symmetrization.
struct Spectrum {
  Eigen::VectorXd xi;     // ascending, all <= 0
  Eigen::MatrixXd basis;  // column k is f_k over the flat lattice
  LatticeIndex lattice;
  double chi = 1.0;       // lambda / upsilon

  double lambda = 0.0;
  double upsilon = 0.0;
  double sqrt_lu = 0.0;   // sqrt(lambda * upsilon)
  double log_chi = 0.0;
  Eigen::VectorXd decay;  // r_k = 2(lambda + upsilon) - (4 + xi_k) sqrt(lambda upsilon)
};

struct SpectrumDiagnostics {
  double symmetry_residual = 0.0;       // max |delta - delta^T|
  double orthonormality_residual = 0.0; // max |B^T B - I|
  double eigen_residual = 0.0;          // max |delta f_k - xi_k f_k| / ||delta||
  double max_eigenvalue = 0.0;
  double min_decay_rate = 0.0;
};

// Symmetric n_star^2 x n_star^2 operator whose spectrum drives every closed form.
Eigen::MatrixXd build_delta(const ModelParams& params);

// Dense symmetric eigensolve. Eigenvalues ascending; each eigenvector's first
// non-negligible component is positive. Throws EigenSolverFailure.
Spectrum decompose(const Eigen::MatrixXd& delta, const ModelParams& params);

inline Spectrum compute_spectrum(const ModelParams& params) {
  return decompose(build_delta(params), params);
}

SpectrumDiagnostics diagnose(const Spectrum& spec, const Eigen::MatrixXd& delta);

// Clamp to [0, 1] after checking the raw value is within 1e-8 of it;
// larger violations throw InternalConsistency.
double checked_probability(double raw);

// The interior neighbour from which `target` is entered.
QueuePair entry_point(BoundaryState target);

// Per-mode coefficients c_k with P[depletion in dt at target] = sum_k c_k e^{-r_k t} dt.
Eigen::VectorXd boundary_flux_coefficients(const Spectrum& spec, QueuePair start,
                                           BoundaryState target);

// Per-mode coefficients d_k with
// P[t < depletion, survivor-side queue = level] = sum_k d_k e^{-r_k t}.
Eigen::VectorXd occupancy_coefficients(const Spectrum& spec, QueuePair start,
                                       Side survivor_side, int level);

// P[depletion <= t, exit at target]. t may be kInfiniteTime.
double u_joint(const Spectrum& spec, const ModelParams& params, double t, QueuePair start,
               BoundaryState target);

// P[t < depletion, Y_t = at].
double survival_kernel(const Spectrum& spec, const ModelParams& params, double t,
                       QueuePair start, QueuePair at);

// Law of the time to the next price change from `state`.
double tau_cdf(const Spectrum& spec, const ModelParams& params, double t, const BookState& state);
double tau_density(const Spectrum& spec, const ModelParams& params, double t,
                   const BookState& state);

// P[depletion < L, exit at target] with L ~ Exp(rate) independent.
double exp_killed_depletion(const Spectrum& spec, const ModelParams& params, double rate,
                            QueuePair start, BoundaryState target);

// Probability that an in-spread arrival at rate `rate` (split evenly between
// the two sides) happens before depletion, lands on the side opposite
// `survivor_side`, and finds the survivor-side queue at `level`.
double exp_window_occupancy(const Spectrum& spec, const ModelParams& params, double rate,
                            QueuePair start, Side survivor_side, int level);

}  // namespace lobsim
