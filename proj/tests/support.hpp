#pragma once

#include "lobsim/error.hpp"
#include "lobsim/model.hpp"

#include <doctest.h>

#include <functional>
#include <random>

namespace testing {

inline lobsim::ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const lobsim::Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return lobsim::ErrorCode::InternalConsistency;
}

// Random valid parameters with lambda <= upsilon and N* in {1..max_n}.
inline lobsim::ModelParams random_params(std::mt19937_64& gen, int max_n) {
  std::uniform_real_distribution<double> rate(0.2, 20.0);
  std::uniform_real_distribution<double> share(0.0, 1.0);
  std::uniform_int_distribution<int> size(1, max_n);
  const double upsilon = rate(gen);
  const double lambda = upsilon * (0.3 + 0.7 * share(gen));
  const double mu = upsilon * share(gen);
  const int n = size(gen);
  std::vector<double> f(static_cast<std::size_t>(n));
  double total = 0.0;
  for (double& w : f) total += (w = 0.05 + share(gen));
  for (double& w : f) w /= total;
  return lobsim::validate_params({lambda, mu, upsilon - mu, upsilon * (0.5 + 2.0 * share(gen)), n, f});
}

}  // namespace testing
