#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>

#include "doctest.h"
#include "tedbeta/csv.hpp"
#include "tedbeta/errors.hpp"
#include "tedbeta/panel.hpp"
#include "tedbeta/sim.hpp"

using namespace tedbeta;
namespace fs = std::filesystem;

namespace {

LogPricePanel tiny_panel(int n, int p) {
  LogPricePanel panel;
  panel.times.resize(n + 1);
  panel.y.resize(n + 1);
  panel.x.resize(n + 1, p);
  for (int i = 0; i <= n; ++i) {
    panel.times[i] = static_cast<double>(i) / n;
    panel.y[i] = 0.01 * i * i;
    for (int j = 0; j < p; ++j) panel.x(i, j) = 0.1 * i + j;
  }
  return panel;
}

struct TempDir {
  fs::path dir;
  TempDir() {
    dir = fs::temp_directory_path() /
          ("tedbeta_test_" + std::to_string(::getpid()) + "_" +
           std::to_string(counter()));
    fs::create_directories(dir);
  }
  ~TempDir() { fs::remove_all(dir); }
  std::string file(const std::string& name) const { return (dir / name).string(); }
  static int counter() {
    static int c = 0;
    return c++;
  }
};

}  // namespace

TEST_CASE("increments are first differences") {
  LogPricePanel panel;
  panel.times.resize(3);
  panel.times << 0.0, 0.5, 1.0;
  panel.y.resize(3);
  panel.y << 0.0, 0.1, 0.3;
  panel.x.resize(3, 1);
  panel.x << 1.0, 1.2, 1.1;
  IncrementMatrix incr = increments(panel);
  CHECK(incr.dy.size() == 2);
  CHECK(incr.dy[0] == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(incr.dy[1] == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(incr.dx(0, 0) == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(incr.dx(1, 0) == doctest::Approx(-0.1).epsilon(1e-14));
  CHECK_FALSE(incr.truncated);
}

TEST_CASE("constant path has zero increments") {
  LogPricePanel panel;
  panel.times.resize(3);
  panel.times << 0.0, 0.5, 1.0;
  panel.y.resize(3);
  panel.y << 3.0, 3.0, 3.0;
  panel.x = Eigen::MatrixXd::Constant(3, 2, 7.0);
  IncrementMatrix incr = increments(panel);
  CHECK(incr.dy.lpNorm<Eigen::Infinity>() == 0.0);
  CHECK(incr.dx.lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("non-finite panel entries are rejected") {
  LogPricePanel panel = tiny_panel(4, 2);
  panel.y[2] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(increments(panel), DataError);
}

TEST_CASE("irregular time grids are rejected") {
  LogPricePanel panel = tiny_panel(4, 1);
  panel.times[2] += 1e-6;
  CHECK_THROWS_AS(panel.validate(), DataError);

  LogPricePanel shifted = tiny_panel(4, 1);
  shifted.times[0] = 0.01;
  CHECK_THROWS_AS(shifted.validate(), DataError);
}

TEST_CASE("window blocks drop the remainder") {
  LogPricePanel panel = tiny_panel(10, 2);
  IncrementMatrix incr = increments(panel);
  std::vector<WindowView> blocks = window_blocks(incr, 3);
  REQUIRE(blocks.size() == 3);
  CHECK(blocks[0].start == 0);
  CHECK(blocks[1].start == 3);
  CHECK(blocks[2].start == 6);
  for (const WindowView& w : blocks) CHECK(w.len == 3);
}

TEST_CASE("block count at the default window length of a dense grid") {
  // floor(4000 / floor(sqrt(4000))) = floor(4000/63) = 63
  LogPricePanel panel = tiny_panel(4000, 1);
  IncrementMatrix incr = increments(panel);
  std::vector<WindowView> blocks = window_blocks(incr, 63);
  CHECK(blocks.size() == 63);
}

TEST_CASE("single block covers everything when k_n equals n") {
  LogPricePanel panel = tiny_panel(8, 1);
  IncrementMatrix incr = increments(panel);
  std::vector<WindowView> blocks = window_blocks(incr, 8);
  REQUIRE(blocks.size() == 1);
  CHECK(blocks[0].start == 0);
  CHECK(blocks[0].len == 8);
}

TEST_CASE("zero window length is a usage error") {
  LogPricePanel panel = tiny_panel(8, 1);
  IncrementMatrix incr = increments(panel);
  CHECK_THROWS_AS(window_blocks(incr, 0), UsageError);
  CHECK_THROWS_AS(window_blocks(incr, 9), UsageError);
}

TEST_CASE("blocks plus remainder reassemble the increment rows") {
  LogPricePanel panel = tiny_panel(11, 3);
  IncrementMatrix incr = increments(panel);
  std::vector<WindowView> blocks = window_blocks(incr, 4);
  REQUIRE(blocks.size() == 2);
  int row = 0;
  for (const WindowView& w : blocks) {
    Eigen::MatrixXd xv = w.xv();
    Eigen::VectorXd yv = w.yv();
    for (int i = 0; i < w.len; ++i, ++row) {
      CHECK(yv[i] == incr.dy[row]);
      CHECK((xv.row(i) - incr.dx.row(row)).lpNorm<Eigen::Infinity>() == 0.0);
    }
  }
  CHECK(row == 8);  // 3 trailing increments unused
}

TEST_CASE("cumulative sums invert increments") {
  LogPricePanel panel = tiny_panel(20, 2);
  IncrementMatrix incr = increments(panel);
  // rebuild the paths from the increments and difference again
  LogPricePanel rebuilt = panel;
  for (int i = 0; i < 20; ++i) {
    rebuilt.y[i + 1] = rebuilt.y[i] + incr.dy[i];
    rebuilt.x.row(i + 1) = rebuilt.x.row(i) + incr.dx.row(i);
  }
  IncrementMatrix again = increments(rebuilt);
  CHECK((again.dy - incr.dy).lpNorm<Eigen::Infinity>() < 1e-12);
  CHECK((again.dx - incr.dx).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("panel csv round trip is exact") {
  TempDir tmp;
  DgpSpec dgp;
  dgp.p = 3;
  dgp.n_all = 50;
  SimOutput sim = simulate_paths(dgp, 7);
  const std::string path = tmp.file("panel.csv");
  write_panel_csv(path, sim.panel);
  LogPricePanel back = read_panel_csv(path);
  REQUIRE(back.n() == sim.panel.n());
  REQUIRE(back.p() == sim.panel.p());
  for (int i = 0; i <= back.n(); ++i) {
    CHECK(back.times[i] == sim.panel.times[i]);
    CHECK(back.y[i] == sim.panel.y[i]);
  }
  CHECK((back.x - sim.panel.x).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("panel csv header is strictly checked") {
  TempDir tmp;
  const std::string path = tmp.file("bad.csv");
  std::ofstream(path) << "time,Y,Z1\n0,0,0\n0.5,0,0\n1,0,0\n";
  CHECK_THROWS_AS(read_panel_csv(path), DataError);

  std::ofstream(path) << "time,Y,X1\n0,0\n";  // short row
  CHECK_THROWS_AS(read_panel_csv(path), DataError);

  std::ofstream(path) << "time,Y,X1\n0,zero,0\n0.5,0,0\n1,0,0\n";
  CHECK_THROWS_AS(read_panel_csv(path), DataError);

  CHECK_THROWS_AS(read_panel_csv(tmp.file("missing.csv")), DataError);
}

TEST_CASE("truth csv round trip") {
  TempDir tmp;
  Eigen::VectorXd v(4);
  v << 1.0251234567890123, 0.0, -0.5, 3e-17;
  const std::string path = tmp.file("truth.csv");
  write_truth_csv(path, v);
  Eigen::VectorXd back = read_truth_csv(path);
  REQUIRE(back.size() == 4);
  for (int j = 0; j < 4; ++j) CHECK(back[j] == v[j]);
}

TEST_CASE("result csv lists coordinates one-based") {
  TempDir tmp;
  Eigen::VectorXd raw(2), thr(2);
  raw << 0.25, -0.125;
  thr << 0.25, 0.0;
  const std::string path = tmp.file("result.csv");
  write_result_csv(path, raw, thr);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "coordinate,raw,thresholded");
  std::getline(in, line);
  CHECK(line == "1,0.25,0.25");
  std::getline(in, line);
  CHECK(line == "2,-0.125,0");
}

TEST_CASE("format_double survives round trips") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 1.234567890123456789, 0.0}) {
    const std::string s = format_double(v);
    CHECK(std::stod(s) == v);
  }
}
