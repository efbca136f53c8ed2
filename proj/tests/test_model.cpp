#include "lobsim/error.hpp"
#include "lobsim/model.hpp"

#include <doctest.h>

#include "support.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>

using namespace lobsim;

using testing::code_of;

TEST_CASE("table 1 scenario validates with the recurrence flag set") {
  const ModelParams p = validate_params({2204, 2331, 0, 2332, 10, {}});
  CHECK(p.upsilon() == 2331);
  CHECK(p.recurrence_ok());
  CHECK(p.reset_dist().size() == 10);
  for (double w : p.reset_dist()) CHECK(w == doctest::Approx(0.1));
}

TEST_CASE("slow in-spread arrivals are accepted but flagged") {
  const ModelParams p = validate_params({1, 1, 0, 0.5, 5, {}});
  CHECK_FALSE(p.recurrence_ok());
}

TEST_CASE("recurrence flag holds at equality") {
  CHECK(validate_params({1, 0.4, 0.6, 1.0, 2, {}}).recurrence_ok());
}

TEST_CASE("parameter validation errors") {
  CHECK(code_of([] { validate_params({1, 1, 0, 1, 2, {0.5, 0.6}}); }) == ErrorCode::BadResetDistribution);
  CHECK(code_of([] { validate_params({1, 1, 0, 1, 2, {0.5, 0.5, 0.0}}); }) == ErrorCode::BadResetDistribution);
  CHECK(code_of([] { validate_params({1, 1, 0, 1, 2, {1.5, -0.5}}); }) == ErrorCode::BadResetDistribution);
  CHECK(code_of([] { validate_params({0, 1, 0, 1, 2, {}}); }) == ErrorCode::NonPositiveRate);
  CHECK(code_of([] { validate_params({1, 0, 0, 1, 2, {}}); }) == ErrorCode::NonPositiveRate);
  CHECK(code_of([] { validate_params({1, -1, 2, 1, 2, {}}); }) == ErrorCode::NonPositiveRate);
  CHECK(code_of([] { validate_params({1, 1, 0, 0, 2, {}}); }) == ErrorCode::NonPositiveRate);
  CHECK(code_of([] { validate_params({1, 1, 0, INFINITY, 2, {}}); }) == ErrorCode::NonPositiveRate);
  CHECK(code_of([] { validate_params({1, 1, 0, 1, 0, {}}); }) == ErrorCode::NStarTooSmall);
}

TEST_CASE("reset weights within tolerance are renormalized") {
  const ModelParams p = validate_params({1, 1, 0, 1, 2, {0.3, 0.7 + 5e-10}});
  CHECK(p.reset_dist()[0] + p.reset_dist()[1] == doctest::Approx(1.0).epsilon(1e-15));
  // Shorter vectors put zero mass on the largest sizes.
  const ModelParams q = validate_params({1, 1, 0, 1, 3, {0.5, 0.5}});
  CHECK(q.reset_prob(3) == 0.0);
}

TEST_CASE("generator rows for N*=2, lambda=1, upsilon=2") {
  const ModelParams p = validate_params({1, 2, 0, 1, 2, {}});
  const Eigen::MatrixXd q = build_generator(p).rates;
  Eigen::MatrixXd expected(3, 3);
  expected << 0, 0, 0, 2, -3, 1, 0, 2, -2;
  CHECK(q == expected);
}

TEST_CASE("generator for N*=1 only allows deaths") {
  const ModelParams p = validate_params({3, 1.5, 0.5, 1, 1, {}});
  const Eigen::MatrixXd q = build_generator(p).rates;
  CHECK(q.rows() == 2);
  CHECK(q(1, 0) == 2.0);
  CHECK(q(1, 1) == -2.0);
  CHECK(q.row(0).isZero());
}

TEST_CASE("generator rows are conservative") {
  for (int n : {1, 2, 5, 10}) {
    const ModelParams p = validate_params({0.7 * n, 1.3, 0.2, 2, n, {}});
    const Eigen::MatrixXd q = build_generator(p).rates;
    for (int j = 1; j <= n; ++j) CHECK(q.row(j).sum() == 0.0);
    for (int i = 0; i <= n; ++i)
      for (int j = 0; j <= n; ++j)
        if (i != j) CHECK(q(i, j) >= 0.0);
  }
}

TEST_CASE("book state validation") {
  const ModelParams p = validate_params({1, 1, 0, 1, 3, {}});
  validate_state(p, {1, 3, 1});
  CHECK(code_of([&] { validate_state(p, {0, 1, 1}); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([&] { validate_state(p, {1, 4, 1}); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([&] { validate_state(p, {1, 1, 0}); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("config parsing") {
  const ModelConfig c = parse_config(
      "# scenario 1\nlambda = 2204\nmu=2331\ntheta=0\nalpha=2332\nn_star=10\n"
      "reset_dist=uniform\nx0_bid=5\nx0_ask=5\nspread0=4\n");
  CHECK(c.raw.lambda == 2204);
  CHECK(c.raw.n_star == 10);
  CHECK(c.raw.reset_dist.empty());
  REQUIRE(c.initial.has_value());
  CHECK(*c.initial == BookState{5, 5, 4});

  const ModelConfig w = parse_config("lambda=1\nmu=1\ntheta=0\nalpha=1\nn_star=2\nreset_dist=0.25,0.75\n");
  CHECK(w.raw.reset_dist == std::vector<double>{0.25, 0.75});
  CHECK_FALSE(w.initial.has_value());
}

TEST_CASE("config errors") {
  const std::string base = "lambda=1\nmu=1\ntheta=0\nalpha=1\nn_star=2\n";
  CHECK(code_of([&] { parse_config(base + "bogus=1\n"); }) == ErrorCode::ConfigError);
  CHECK(code_of([&] { parse_config("lambda=1\nmu=1\n"); }) == ErrorCode::ConfigError);
  CHECK(code_of([&] { parse_config(base + "lambda=2\n"); }) == ErrorCode::ConfigError);
  CHECK(code_of([&] { parse_config(base + "x0_bid=1\n"); }) == ErrorCode::ConfigError);
  CHECK(code_of([&] { parse_config("lambda=abc\nmu=1\ntheta=0\nalpha=1\nn_star=2\n"); }) ==
        ErrorCode::ConfigError);
  CHECK(code_of([&] { parse_config(base + "no equals sign\n"); }) == ErrorCode::ConfigError);
  CHECK(code_of([] { load_config("/nonexistent/dir/model.cfg"); }) == ErrorCode::IoError);
}

TEST_CASE("config round trip through a file") {
  const std::string path = "test_model_tmp.cfg";
  {
    std::ofstream out(path);
    out << "lambda=2\nmu=1\ntheta=0.5\nalpha=3\nn_star=4\nreset_dist=uniform\n";
  }
  const ModelConfig c = load_config(path);
  std::remove(path.c_str());
  const ModelParams p = validate_params(c.raw);
  CHECK(p.upsilon() == 1.5);
  CHECK(p.n_star() == 4);
}

TEST_CASE("error classification") {
  CHECK(is_numerical(ErrorCode::EigenSolverFailure));
  CHECK(is_numerical(ErrorCode::BisectionNoConvergence));
  CHECK_FALSE(is_numerical(ErrorCode::ConfigError));
  CHECK(std::string(error_code_name(ErrorCode::StartOnBoundary)) == "StartOnBoundary");
}
