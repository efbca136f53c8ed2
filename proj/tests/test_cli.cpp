#include <doctest.h>
#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

namespace fs = std::filesystem;

namespace {

const fs::path& tmp_dir() {
  static const fs::path dir = [] {
    fs::path d(LOBSIM_TEST_TMP);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string tmp(const std::string& name) { return (tmp_dir() / name).string(); }

int run(const std::string& args, const std::string& stdout_file = "") {
  std::string cmd = std::string("\"") + LOBSIM_CLI_PATH + "\" " + args;
  cmd += stdout_file.empty() ? " > /dev/null" : " > \"" + stdout_file + "\"";
  cmd += " 2> \"" + tmp("stderr.txt") + "\"";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(slurp(path));
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

std::string write_config(const std::string& name, const std::string& body) {
  const std::string path = tmp(name);
  std::ofstream(path) << body;
  return path;
}

std::string small_config() {
  return write_config("small.cfg",
                      "lambda=12\nmu=13\ntheta=0\nalpha=13\nn_star=4\nx0_bid=2\nx0_ask=2\nspread0=2\n");
}

}  // namespace

TEST_CASE("spectrum output") {
  const std::string one = write_config("one.cfg", "lambda=1\nmu=1\ntheta=0\nalpha=1\nn_star=1\n");
  REQUIRE(run("spectrum --config " + one + " --out " + tmp("spec1.csv")) == 0);
  const auto rows = read_csv(tmp("spec1.csv"));
  REQUIRE(rows.size() == 2);
  CHECK(rows[0] == std::vector<std::string>{"k", "xi", "decay_rate"});
  CHECK(std::stod(rows[1][1]) == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(std::stod(rows[1][2]) == doctest::Approx(2.0).epsilon(1e-12));

  const std::string ten = write_config("ten.cfg", "lambda=2204\nmu=2331\ntheta=0\nalpha=2332\nn_star=10\n");
  REQUIRE(run("spectrum --config " + ten, tmp("spec10.csv")) == 0);
  const auto big = read_csv(tmp("spec10.csv"));
  REQUIRE(big.size() == 101);
  for (std::size_t i = 1; i < big.size(); ++i) {
    CHECK(std::stod(big[i][1]) <= 1e-12);
    CHECK(std::stod(big[i][2]) > 0.0);
  }
}

TEST_CASE("prob-up and prob-upup tables") {
  const std::string cfg = small_config();
  REQUIRE(run("prob-up --config " + cfg + " --state 3,3,1 --out " + tmp("up.csv")) == 0);
  const auto up = read_csv(tmp("up.csv"));
  REQUIRE(up.size() == 2);
  CHECK(up[0] == std::vector<std::string>{"bid", "ask", "spread", "prob_up"});
  CHECK(std::stod(up[1][3]) == doctest::Approx(0.5).epsilon(1e-12));

  const std::string plain = write_config("plain.cfg", "lambda=12\nmu=13\ntheta=0\nalpha=13\nn_star=4\n");
  REQUIRE(run("prob-up --config " + plain + " --out " + tmp("up_all.csv")) == 0);
  REQUIRE(run("prob-upup --config " + plain + " --out " + tmp("upup_all.csv")) == 0);
  const auto all = read_csv(tmp("up_all.csv"));
  const auto two = read_csv(tmp("upup_all.csv"));
  REQUIRE(all.size() == 33);
  REQUIRE(two.size() == 33);
  CHECK(two[0].back() == "prob_two_up");
  for (std::size_t i = 1; i < all.size(); ++i) {
    CHECK(all[i][0] == two[i][0]);
    CHECK(all[i][1] == two[i][1]);
    const double p = std::stod(all[i][3]);
    const double q = std::stod(two[i][3]);
    CHECK(p >= 0.0);
    CHECK(p <= 1.0);
    CHECK(q >= 0.0);
    CHECK(q <= p + 1e-12);
  }
}

TEST_CASE("tau-dist curves") {
  const std::string cfg = small_config();
  REQUIRE(run("tau-dist --config " + cfg + " --t-grid 0:1:0.05 --out " + tmp("tau.csv")) == 0);
  const auto rows = read_csv(tmp("tau.csv"));
  REQUIRE(rows.size() == 22);
  CHECK(rows[0] == std::vector<std::string>{"t", "survival", "density"});
  CHECK(std::stod(rows[1][1]) == 1.0);
  for (std::size_t i = 2; i < rows.size(); ++i) CHECK(std::stod(rows[i][1]) <= std::stod(rows[i - 1][1]));
  CHECK(run("tau-dist --config " + cfg) == 2);
  CHECK(run("tau-dist --config " + cfg + " --t-grid 1:0:0.1") == 2);
}

TEST_CASE("simulate is reproducible per seed") {
  const std::string cfg = small_config();
  REQUIRE(run("simulate --config " + cfg + " --seed 7 --horizon 5 --out " + tmp("a.csv")) == 0);
  REQUIRE(run("simulate --config " + cfg + " --seed 7 --horizon 5 --out " + tmp("b.csv")) == 0);
  REQUIRE(run("simulate --config " + cfg + " --seed 8 --horizon 5 --out " + tmp("c.csv")) == 0);
  CHECK(slurp(tmp("a.csv")) == slurp(tmp("b.csv")));
  CHECK(slurp(tmp("a.csv")) != slurp(tmp("c.csv")));
  CHECK(slurp(tmp("a.csv")).rfind("epoch_s,mid_half_ticks,spread,bid,ask\n0,0,2,2,2\n", 0) == 0);

  REQUIRE(run("simulate --config " + cfg + " --seed 7 --horizon 2 --engine oracle --events " + tmp("ev.csv") +
              " --out " + tmp("o.csv")) == 0);
  CHECK(slurp(tmp("ev.csv")).rfind("time_s,side,kind,bid,ask,spread,mid_half_ticks\n", 0) == 0);
  CHECK(run("simulate --config " + cfg + " --seed 7 --horizon 2 --events " + tmp("ev2.csv")) == 2);
  CHECK(run("simulate --config " + cfg + " --horizon 5") == 2);
}

TEST_CASE("mc-study outputs and worker independence") {
  const std::string cfg = small_config();
  const std::string base = "mc-study --config " + cfg + " --seed 3 --horizon 2,4 --n-paths 60";
  REQUIRE(run(base + " --workers 1 --out " + tmp("w1")) == 0);
  REQUIRE(run(base + " --workers 2 --out " + tmp("w2")) == 0);
  CHECK(slurp(tmp("w1.json")) == slurp(tmp("w2.json")));
  CHECK(slurp(tmp("w1.csv")) == slurp(tmp("w2.csv")));
  CHECK(fs::exists(tmp("w1.density_0.csv")));
  CHECK(fs::exists(tmp("w1.density_1.csv")));
  const auto doc = nlohmann::json::parse(slurp(tmp("w1.json")));
  CHECK(doc["horizons"].size() == 2);
  CHECK(doc["horizons"][0]["n_paths"] == 60);

  REQUIRE(run(base, tmp("stdout.json")) == 0);
  CHECK(slurp(tmp("stdout.json")) == slurp(tmp("w1.json")));
  CHECK(run(base + " --workers 1 --horizon 4,2") == 2);
}

TEST_CASE("occupancy output") {
  const std::string cfg = small_config();
  REQUIRE(run("occupancy --config " + cfg + " --seed 1 --horizon 3 --n-paths 40 --out " + tmp("occ.csv")) == 0);
  const auto rows = read_csv(tmp("occ.csv"));
  REQUIRE(rows.size() == 5);
  CHECK(rows[0] == std::vector<std::string>{"spread", "fraction", "std_error"});
  double total = 0.0;
  for (std::size_t i = 1; i < rows.size(); ++i) total += std::stod(rows[i][1]);
  CHECK(total == doctest::Approx(1.0));
}

TEST_CASE("exit codes for bad input") {
  CHECK(run("spectrum --config " + tmp("missing.cfg")) == 2);
  CHECK(run("spectrum") == 2);
  CHECK(run("no-such-command") == 2);
  const std::string bad = write_config("bad.cfg", "lambda=-1\nmu=1\ntheta=0\nalpha=1\nn_star=2\n");
  CHECK(run("spectrum --config " + bad) == 2);
  CHECK(slurp(tmp("stderr.txt")).size() > 0);
  const std::string cfg = small_config();
  CHECK(run("prob-up --config " + cfg + " --state 9,1,1") == 2);
  CHECK(run("spectrum --config " + cfg + " --out /nonexistent/dir/x.csv") == 2);
}
