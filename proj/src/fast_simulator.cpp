#include "lobsim/fast_simulator.hpp"

#include "lobsim/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lobsim {

BookState next_state(const BookState& state, OutcomeCategory outcome, int reset_size) {
  switch (outcome.kind) {
    case OutcomeKind::AskDepleted: return {outcome.level, reset_size, state.spread + 1};
    case OutcomeKind::BidDepleted: return {reset_size, outcome.level, state.spread + 1};
    case OutcomeKind::InSpreadBid: return {reset_size, outcome.level, state.spread - 1};
    case OutcomeKind::InSpreadAsk: return {outcome.level, reset_size, state.spread - 1};
  }
  return state;
}

// ---------------------------------------------------------------------------
// DecayTable

DecayTable::DecayTable(const Spectrum& spec) : decay_(spec.decay) {
  const int n = spec.lattice.n_star();
  const double gap = std::sqrt(spec.lambda) - std::sqrt(spec.upsilon);
  base_ = 2.0 * gap * gap;

  // Single-queue factor of the lattice operator.
  Eigen::MatrixXd line = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    line(i, i) = -2.0;
    if (i + 1 < n) line(i, i + 1) = line(i + 1, i) = 1.0;
  }
  line(n - 1, n - 1) += std::sqrt(spec.chi);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(line, Eigen::EigenvaluesOnly);

  pairs_.assign(static_cast<std::size_t>(spec.xi.size()), {-1, -1});
  factorized_ = solver.info() == Eigen::Success;
  if (factorized_) {
    const Eigen::VectorXd eta = solver.eigenvalues();
    line_rates_.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) line_rates_[static_cast<std::size_t>(i)] = -spec.sqrt_lu * eta(i);
    for (Eigen::Index k = 0; k < spec.xi.size(); ++k) {
      double best = std::numeric_limits<double>::infinity();
      std::pair<int, int> arg{-1, -1};
      for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
          const double err = std::abs(eta(i) + eta(j) - spec.xi(k));
          if (err < best) {
            best = err;
            arg = {i, j};
          }
        }
      }
      if (best <= 1e-9 * std::max(1.0, std::abs(spec.xi(k)))) {
        pairs_[static_cast<std::size_t>(k)] = arg;
      } else {
        factorized_ = false;
      }
    }
  }
}

void DecayTable::evaluate(double t, double shift, std::span<double> out) const {
  const std::size_t m = pairs_.size();
  if (factorized_) {
    // Factors with negative rates (chi > 1) grow with t; fall back before they overflow.
    double max_growth = 0.0;
    for (double r : line_rates_) max_growth = std::max(max_growth, -r * t);
    if (max_growth < 300.0) {
      double line_exp[256];
      std::vector<double> heap;
      double* le = line_exp;
      if (line_rates_.size() > 256) {
        heap.resize(line_rates_.size());
        le = heap.data();
      }
      for (std::size_t i = 0; i < line_rates_.size(); ++i) le[i] = std::exp(-line_rates_[i] * t);
      const double common = std::exp(-(base_ + shift) * t);
      for (std::size_t k = 0; k < m; ++k) {
        const auto [i, j] = pairs_[k];
        out[k] = common * le[i] * le[j];
      }
      return;
    }
  }
  for (std::size_t k = 0; k < m; ++k) {
    out[k] = std::exp(-(shift + decay_(static_cast<Eigen::Index>(k))) * t);
  }
}

// ---------------------------------------------------------------------------
// Cycle plans

namespace {

CategoryLaw make_law(OutcomeCategory category, const Eigen::VectorXd& weights, double shift,
                     const Eigen::VectorXd& decay) {
  CategoryLaw law;
  law.category = category;
  const auto m = static_cast<std::size_t>(weights.size());
  law.weights.resize(m);
  law.weighted_rates.resize(m);
  double mass = 0.0;
  double first_moment = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const double w = weights(static_cast<Eigen::Index>(k));
    const double rate = shift + decay(static_cast<Eigen::Index>(k));
    law.weights[k] = w;
    law.weighted_rates[k] = w * rate;
    mass += w;
    first_moment += w / rate;
  }
  // Rounding can leave an impossible category with mass of order -1e-17.
  law.mass = mass > 0.0 ? mass : 0.0;
  law.mean_time = mass > 0.0 ? std::max(first_moment / mass, 0.0) : 0.0;
  return law;
}

}  // namespace

CyclePlan plan_cycle(const Spectrum& spec, const ModelParams& params, const BookState& state) {
  validate_state(params, state);
  const int n = params.n_star();
  CyclePlan plan;
  plan.start = {state.bid, state.ask};
  plan.wide = state.spread > 1;
  plan.shift = plan.wide ? 2.0 * params.alpha() : 0.0;
  plan.min_rate = plan.shift + spec.decay.minCoeff();
  plan.categories.resize(static_cast<std::size_t>(4 * n));

  const Eigen::ArrayXd rates = plan.shift + spec.decay.array();
  for (int w = 1; w <= n; ++w) {
    for (Side depleted : {Side::Ask, Side::Bid}) {
      const Eigen::VectorXd flux = boundary_flux_coefficients(spec, plan.start, {depleted, w});
      const OutcomeCategory cat{
          depleted == Side::Ask ? OutcomeKind::AskDepleted : OutcomeKind::BidDepleted, w};
      plan.categories[static_cast<std::size_t>(category_index(cat, n))] =
          make_law(cat, (flux.array() / rates).matrix(), plan.shift, spec.decay);
    }
    for (Side survivor : {Side::Ask, Side::Bid}) {
      const OutcomeCategory cat{
          survivor == Side::Ask ? OutcomeKind::InSpreadBid : OutcomeKind::InSpreadAsk, w};
      Eigen::VectorXd weights = Eigen::VectorXd::Zero(spec.decay.size());
      if (plan.wide) {
        const Eigen::VectorXd occ = occupancy_coefficients(spec, plan.start, survivor, w);
        weights = (0.5 * plan.shift * occ.array() / rates).matrix();
      }
      plan.categories[static_cast<std::size_t>(category_index(cat, n))] =
          make_law(cat, weights, plan.shift, spec.decay);
    }
  }

  plan.cumulative.resize(plan.categories.size());
  double total = 0.0;
  for (std::size_t i = 0; i < plan.categories.size(); ++i) {
    total += plan.categories[i].mass;
    plan.cumulative[i] = total;
  }
  if (std::abs(total - 1.0) > 1e-8) {
    throw Error(ErrorCode::InternalConsistency,
                "cycle outcome masses sum to " + std::to_string(total));
  }
  return plan;
}

double invert_category_time(const CategoryLaw& law, const CyclePlan& plan, const DecayTable& decay,
                            double u) {
  constexpr int kMaxIterations = 400;
  constexpr double kTolerance = 1e-10;
  const double target = u * law.mass;
  const double tol = kTolerance * law.mass;
  thread_local std::vector<double> terms;
  terms.resize(decay.size());

  double cdf = 0.0;
  double pdf = 0.0;
  const auto evaluate = [&](double t) {
    decay.evaluate(t, plan.shift, terms);
    double remaining = 0.0;
    double slope = 0.0;
    for (std::size_t k = 0; k < terms.size(); ++k) {
      remaining += law.weights[k] * terms[k];
      slope += law.weighted_rates[k] * terms[k];
    }
    cdf = law.mass - remaining;
    pdf = slope;
  };

  // Bracket: grow the upper end until it holds the target (or all but 1e-12 of the mass).
  double lo = 0.0;
  double hi = 10.0 / plan.min_rate;
  const double reachable = std::min(target, (1.0 - 1e-12) * law.mass);
  int iterations = 0;
  for (evaluate(hi); cdf < reachable; evaluate(hi)) {
    lo = hi;
    hi *= 2.0;
    if (++iterations > kMaxIterations) {
      throw Error(ErrorCode::BisectionNoConvergence, "could not bracket the cycle time");
    }
  }
  if (std::abs(cdf - target) <= tol) return hi;

  // Newton steps, falling back to bisection whenever a step leaves the bracket.
  double t = std::clamp(-std::log1p(-u) * law.mean_time, lo, hi);
  if (!(t > lo && t < hi)) t = 0.5 * (lo + hi);
  for (iterations = 0; iterations < kMaxIterations; ++iterations) {
    evaluate(t);
    const double diff = cdf - target;
    if (std::abs(diff) <= tol) return t;
    if (diff < 0.0) {
      lo = t;
    } else {
      hi = t;
    }
    if (hi - lo <= 1e-15 * hi) return t;
    double next = pdf > 0.0 ? t - diff / pdf : lo;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    t = next;
  }
  throw Error(ErrorCode::BisectionNoConvergence,
              "cycle time inversion did not reach tolerance " + std::to_string(kTolerance));
}

int sample_reset(const ModelParams& params, Rng& rng) {
  const auto& f = params.reset_dist();
  const double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    acc += f[i];
    if (u < acc) return static_cast<int>(i) + 1;
  }
  // u landed in the rounding gap above the last partial sum.
  for (std::size_t i = f.size(); i-- > 0;) {
    if (f[i] > 0.0) return static_cast<int>(i) + 1;
  }
  return params.n_star();
}

CycleSample sample_price_change(const CyclePlan& plan, const DecayTable& decay,
                                const ModelParams& params, const BookState& state, Rng& rng) {
  if (!(plan.start == QueuePair{state.bid, state.ask}) || plan.wide != (state.spread > 1)) {
    throw Error(ErrorCode::InvalidArgument, "cycle plan does not match the book state");
  }
  const double total = plan.cumulative.back();
  const double u_cat = rng.uniform() * total;
  auto it = std::upper_bound(plan.cumulative.begin(), plan.cumulative.end(), u_cat);
  std::size_t index = static_cast<std::size_t>(it - plan.cumulative.begin());
  if (index >= plan.categories.size()) index = plan.categories.size() - 1;
  while (plan.categories[index].mass <= 0.0 && index > 0) --index;
  const CategoryLaw& law = plan.categories[index];

  CycleSample s;
  s.outcome = law.category;
  s.tau = invert_category_time(law, plan, decay, rng.uniform());
  s.next = next_state(state, s.outcome, sample_reset(params, rng));
  s.move = price_move(s.outcome.kind);
  return s;
}

// ---------------------------------------------------------------------------
// FastSimulator

FastSimulator::FastSimulator(const ModelParams& params)
    : FastSimulator(params, std::make_shared<const Spectrum>(compute_spectrum(params))) {}

FastSimulator::FastSimulator(const ModelParams& params, std::shared_ptr<const Spectrum> spectrum)
    : params_(params), spectrum_(std::move(spectrum)), decay_(*spectrum_) {
  const auto slots = static_cast<std::size_t>(2 * params_.n_star() * params_.n_star());
  plan_once_ = std::make_unique<std::once_flag[]>(slots);
  plans_.resize(slots);
}

const CyclePlan& FastSimulator::plan(const BookState& state) const {
  validate_state(params_, state);
  const int n = params_.n_star();
  const auto slot = static_cast<std::size_t>((state.spread > 1 ? n * n : 0) +
                                             spectrum_->lattice.flat(state.bid, state.ask));
  std::call_once(plan_once_[slot], [&] {
    plans_[slot] = std::make_unique<CyclePlan>(plan_cycle(*spectrum_, params_, state));
  });
  return *plans_[slot];
}

CycleSample FastSimulator::step(const BookState& state, Rng& rng) const {
  return sample_price_change(plan(state), decay_, params_, state, rng);
}

PathRecord FastSimulator::simulate_path(const BookState& initial, double horizon,
                                        std::uint64_t seed, std::uint64_t path_index) const {
  validate_state(params_, initial);
  if (!(horizon > 0.0)) throw Error(ErrorCode::InvalidArgument, "horizon must be positive");
  Rng rng(seed, StreamTag::FastPath, path_index);
  PathRecord path;
  path.initial = initial;
  path.horizon = horizon;
  BookState state = initial;
  double t = 0.0;
  std::int64_t mid = 0;
  for (;;) {
    const CycleSample s = step(state, rng);
    t += s.tau;
    if (t > horizon) break;
    mid += s.move;
    state = s.next;
    path.epochs.push_back({t, mid, state.spread, state.bid, state.ask});
  }
  return path;
}

}  // namespace lobsim
