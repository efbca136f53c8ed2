#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace lobsim {

// Unvalidated parameter bundle, as read from a config file or a caller.
// An empty reset_dist means uniform on {1..n_star}.
struct RawParams {
  double lambda = 0.0;  // limit-order arrivals per side (1/sec)
  double mu = 0.0;      // market orders (1/sec)
  double theta = 0.0;   // cancellations (1/sec)
  double alpha = 0.0;   // in-spread limit arrivals per side (1/sec)
  int n_star = 0;       // queue cap
  std::vector<double> reset_dist;
};

// Validated model rates. Only validate_params() produces one.
class ModelParams {
 public:
  double lambda() const noexcept { return lambda_; }
  double mu() const noexcept { return mu_; }
  double theta() const noexcept { return theta_; }
  double alpha() const noexcept { return alpha_; }
  double upsilon() const noexcept { return mu_ + theta_; }
  int n_star() const noexcept { return n_star_; }

  // f(1..n_star), stored zero-based: reset_dist()[i] = f(i + 1).
  const std::vector<double>& reset_dist() const noexcept { return reset_; }
  double reset_prob(int size) const { return reset_.at(static_cast<std::size_t>(size - 1)); }

  // Sufficient condition for positive recurrence of the spread; configs
  // that fail it are accepted but flagged.
  bool recurrence_ok() const noexcept { return alpha_ >= mu_ + theta_; }

 private:
  friend ModelParams validate_params(const RawParams& raw);
  ModelParams() = default;

  double lambda_ = 0.0;
  double mu_ = 0.0;
  double theta_ = 0.0;
  double alpha_ = 0.0;
  int n_star_ = 0;
  std::vector<double> reset_;
};

// Throws Error{NonPositiveRate | BadResetDistribution | NStarTooSmall}.
// Weights summing to 1 within 1e-9 are renormalized.
ModelParams validate_params(const RawParams& raw);

struct BookState {
  int bid = 1;
  int ask = 1;
  int spread = 1;  // ticks

  friend bool operator==(const BookState&, const BookState&) = default;
};

// Throws InvalidArgument unless bid, ask in {1..n_star} and spread >= 1.
void validate_state(const ModelParams& params, const BookState& state);

// Rate matrix of a single level-I queue over {0..n_star}. Row 0 is zero:
// depletion is treated as absorption.
struct QueueGenerator {
  Eigen::MatrixXd rates;
};

QueueGenerator build_generator(const ModelParams& params);

// Parsed key=value config file.
struct ModelConfig {
  RawParams raw;
  std::optional<BookState> initial;
};

ModelConfig parse_config(const std::string& text);
ModelConfig load_config(const std::string& path);

}  // namespace lobsim
