#include "lobsim/model.hpp"

#include "lobsim/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

namespace lobsim {

namespace {

void require_rate(double value, const char* name, bool allow_zero) {
  if (!std::isfinite(value) || value < 0.0 || (!allow_zero && value == 0.0)) {
    throw Error(ErrorCode::NonPositiveRate,
                std::string(name) + " must be finite and " +
                    (allow_zero ? "non-negative" : "positive") + ", got " +
                    std::to_string(value));
  }
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

double parse_double(const std::string& key, const std::string& value) {
  double out = 0.0;
  const auto* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    throw Error(ErrorCode::ConfigError, "bad number for '" + key + "': '" + value + "'");
  }
  return out;
}

int parse_int(const std::string& key, const std::string& value) {
  int out = 0;
  const auto* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    throw Error(ErrorCode::ConfigError, "bad integer for '" + key + "': '" + value + "'");
  }
  return out;
}

}  // namespace

ModelParams validate_params(const RawParams& raw) {
  require_rate(raw.lambda, "lambda", false);
  require_rate(raw.mu, "mu", true);
  require_rate(raw.theta, "theta", true);
  require_rate(raw.alpha, "alpha", false);
  if (raw.mu + raw.theta <= 0.0) {
    throw Error(ErrorCode::NonPositiveRate, "mu + theta must be positive");
  }
  if (raw.n_star < 1) {
    throw Error(ErrorCode::NStarTooSmall,
                "n_star must be at least 1, got " + std::to_string(raw.n_star));
  }

  const auto n = static_cast<std::size_t>(raw.n_star);
  std::vector<double> reset;
  if (raw.reset_dist.empty()) {
    reset.assign(n, 1.0 / static_cast<double>(n));
  } else {
    if (raw.reset_dist.size() > n) {
      throw Error(ErrorCode::BadResetDistribution,
                  "reset_dist has support beyond n_star (" +
                      std::to_string(raw.reset_dist.size()) + " weights)");
    }
    for (double w : raw.reset_dist) {
      if (!std::isfinite(w) || w < 0.0) {
        throw Error(ErrorCode::BadResetDistribution, "reset_dist weights must be finite and >= 0");
      }
    }
    const double total = std::accumulate(raw.reset_dist.begin(), raw.reset_dist.end(), 0.0);
    if (std::abs(total - 1.0) > 1e-9) {
      throw Error(ErrorCode::BadResetDistribution,
                  "reset_dist must sum to 1, got " + std::to_string(total));
    }
    reset = raw.reset_dist;
    reset.resize(n, 0.0);
    for (double& w : reset) w /= total;
  }

  ModelParams p;
  p.lambda_ = raw.lambda;
  p.mu_ = raw.mu;
  p.theta_ = raw.theta;
  p.alpha_ = raw.alpha;
  p.n_star_ = raw.n_star;
  p.reset_ = std::move(reset);
  return p;
}

void validate_state(const ModelParams& params, const BookState& state) {
  const int n = params.n_star();
  if (state.bid < 1 || state.bid > n || state.ask < 1 || state.ask > n) {
    throw Error(ErrorCode::InvalidArgument,
                "queue sizes must lie in {1.." + std::to_string(n) + "}, got (" +
                    std::to_string(state.bid) + ", " + std::to_string(state.ask) + ")");
  }
  if (state.spread < 1) {
    throw Error(ErrorCode::InvalidArgument, "spread must be >= 1");
  }
}

QueueGenerator build_generator(const ModelParams& params) {
  const int n = params.n_star();
  const double lambda = params.lambda();
  const double upsilon = params.upsilon();
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n + 1, n + 1);
  for (int j = 1; j <= n; ++j) {
    q(j, j - 1) = upsilon;
    if (j < n) {
      q(j, j + 1) = lambda;
      q(j, j) = -(lambda + upsilon);
    } else {
      q(j, j) = -upsilon;
    }
  }
  return {std::move(q)};
}

ModelConfig parse_config(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::ConfigError, "line " + std::to_string(line_no) + ": expected key=value");
    }
    std::string key = trim(std::string_view(body).substr(0, eq));
    std::string value = trim(std::string_view(body).substr(eq + 1));
    if (!kv.emplace(key, value).second) {
      throw Error(ErrorCode::ConfigError, "duplicate key '" + key + "'");
    }
  }

  ModelConfig cfg;
  int state_keys = 0;
  BookState initial;
  for (const auto& [key, value] : kv) {
    if (key == "lambda") {
      cfg.raw.lambda = parse_double(key, value);
    } else if (key == "mu") {
      cfg.raw.mu = parse_double(key, value);
    } else if (key == "theta") {
      cfg.raw.theta = parse_double(key, value);
    } else if (key == "alpha") {
      cfg.raw.alpha = parse_double(key, value);
    } else if (key == "n_star") {
      cfg.raw.n_star = parse_int(key, value);
    } else if (key == "reset_dist") {
      if (value != "uniform") {
        std::istringstream ws(value);
        std::string item;
        while (std::getline(ws, item, ',')) {
          cfg.raw.reset_dist.push_back(parse_double(key, trim(item)));
        }
      }
    } else if (key == "x0_bid") {
      initial.bid = parse_int(key, value);
      ++state_keys;
    } else if (key == "x0_ask") {
      initial.ask = parse_int(key, value);
      ++state_keys;
    } else if (key == "spread0") {
      initial.spread = parse_int(key, value);
      ++state_keys;
    } else {
      throw Error(ErrorCode::ConfigError, "unknown key '" + key + "'");
    }
  }
  for (const char* required : {"lambda", "mu", "theta", "alpha", "n_star"}) {
    if (!kv.count(required)) {
      throw Error(ErrorCode::ConfigError, std::string("missing key '") + required + "'");
    }
  }
  if (state_keys == 3) {
    cfg.initial = initial;
  } else if (state_keys != 0) {
    throw Error(ErrorCode::ConfigError, "x0_bid, x0_ask and spread0 must be given together");
  }
  return cfg;
}

ModelConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace lobsim
