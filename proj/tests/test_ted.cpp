#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "tedbeta/errors.hpp"
#include "tedbeta/sim.hpp"
#include "tedbeta/ted.hpp"

using namespace tedbeta;

namespace {

WindowGram make_gram(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                     int k = 10) {
  WindowGram g;
  g.a = a;
  g.bvec = b;
  g.k = k;
  g.p_full = static_cast<int>(a.cols());
  for (int j = 0; j < g.p_full; ++j) g.cols.push_back(j);
  g.scales.active.assign(g.p_full, 1);
  g.scales.x_sd = Eigen::VectorXd::Ones(g.p_full);
  g.scales.x_mean = Eigen::VectorXd::Zero(g.p_full);
  g.scales.y_sd = 1.0;
  return g;
}

Eigen::MatrixXd random_spd(std::mt19937_64& eng, int p) {
  std::normal_distribution<double> gd(0.0, 1.0);
  Eigen::MatrixXd m(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) m(i, j) = gd(eng);
  return m * m.transpose() + 0.5 * Eigen::MatrixXd::Identity(p, p);
}

}  // namespace

TEST_CASE("hard and soft thresholding") {
  Eigen::VectorXd raw(2);
  raw << 0.9, 0.3;
  Eigen::VectorXd hard = threshold(raw, 0.5, ThresholdRule::hard);
  CHECK(hard[0] == 0.9);
  CHECK(hard[1] == 0.0);
  Eigen::VectorXd soft = threshold(raw, 0.5, ThresholdRule::soft);
  CHECK(soft[0] == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(soft[1] == 0.0);
}

TEST_CASE("threshold keeps values exactly at the cutoff") {
  Eigen::VectorXd raw(2);
  raw << 0.5, -0.5;
  Eigen::VectorXd hard = threshold(raw, 0.5, ThresholdRule::hard);
  CHECK(hard[0] == 0.5);
  CHECK(hard[1] == -0.5);
  Eigen::VectorXd soft = threshold(raw, 0.5, ThresholdRule::soft);
  CHECK(soft[0] == 0.0);
  CHECK(soft[1] == 0.0);
}

TEST_CASE("zero threshold is the identity") {
  Eigen::VectorXd raw(3);
  raw << -0.2, 0.0, 1.5;
  CHECK((threshold(raw, 0.0, ThresholdRule::hard) - raw)
            .lpNorm<Eigen::Infinity>() == 0.0);
  CHECK((threshold(raw, 0.0, ThresholdRule::soft) - raw)
            .lpNorm<Eigen::Infinity>() == 0.0);
  CHECK_THROWS_AS(threshold(raw, -0.1, ThresholdRule::hard), UsageError);
}

TEST_CASE("hard thresholding is idempotent, soft moves by at most h") {
  std::mt19937_64 eng(2);
  std::normal_distribution<double> gd(0.0, 1.0);
  Eigen::VectorXd raw(50);
  for (int i = 0; i < 50; ++i) raw[i] = gd(eng);
  const double h = 0.7;
  Eigen::VectorXd once = threshold(raw, h, ThresholdRule::hard);
  Eigen::VectorXd twice = threshold(once, h, ThresholdRule::hard);
  CHECK((twice - once).lpNorm<Eigen::Infinity>() == 0.0);
  Eigen::VectorXd soft = threshold(raw, h, ThresholdRule::soft);
  for (int i = 0; i < 50; ++i) {
    if (soft[i] != 0.0) CHECK(std::abs(soft[i] - raw[i]) <= h + 1e-15);
  }
}

TEST_CASE("integration weights every window by k_n over n") {
  std::vector<Eigen::VectorXd> betas(2);
  betas[0] = Eigen::Vector2d(1.0, 0.0);
  betas[1] = Eigen::Vector2d(0.0, 1.0);
  Eigen::VectorXd ib = integrate(betas, 1, 2);
  CHECK(ib[0] == 0.5);
  CHECK(ib[1] == 0.5);

  // remainder rows carry no weight: 3 windows of 3 out of n = 10
  std::vector<Eigen::VectorXd> ones(3, Eigen::VectorXd::Ones(1));
  CHECK(integrate(ones, 3, 10)[0] == doctest::Approx(0.9).epsilon(1e-15));

  std::vector<Eigen::VectorXd> single(1, Eigen::Vector2d(2.0, -1.0));
  Eigen::VectorXd whole = integrate(single, 5, 5);
  CHECK(whole[0] == 2.0);
  CHECK(whole[1] == -1.0);
}

TEST_CASE("integration input validation") {
  CHECK_THROWS_AS(integrate({}, 3, 10), UsageError);
  std::vector<Eigen::VectorXd> betas(1, Eigen::Vector2d(1.0, 1.0));
  CHECK_THROWS_AS(integrate(betas, 0, 10), UsageError);
  CHECK_THROWS_AS(integrate(betas, 11, 10), UsageError);
  betas.push_back(Eigen::VectorXd::Ones(3));
  CHECK_THROWS_AS(integrate(betas, 2, 10), UsageError);
}

TEST_CASE("debias leaves an exactly fitting estimate alone") {
  std::mt19937_64 eng(3);
  Eigen::MatrixXd a = random_spd(eng, 4);
  Eigen::VectorXd beta = Eigen::Vector4d(0.5, 0.0, -1.0, 0.2);
  WindowGram g = make_gram(a, a * beta);
  Eigen::MatrixXd omega = random_spd(eng, 4);
  Eigen::VectorXd out = debias(g, beta, omega);
  CHECK((out - beta).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("debias with the exact inverse reproduces least squares") {
  std::mt19937_64 eng(4);
  Eigen::MatrixXd a = random_spd(eng, 3);
  Eigen::VectorXd b(3);
  b << 0.4, -0.1, 0.9;
  WindowGram g = make_gram(a, b);
  Eigen::VectorXd start = Eigen::Vector3d(1.0, 1.0, 1.0);
  Eigen::VectorXd out = debias(g, start, a.inverse());
  CHECK((out - a.fullPivLu().solve(b)).lpNorm<Eigen::Infinity>() < 1e-10);
}

TEST_CASE("debias matches the dense formula and checks widths") {
  std::mt19937_64 eng(5);
  Eigen::MatrixXd a = random_spd(eng, 5);
  Eigen::VectorXd b = Eigen::VectorXd::Random(5);
  Eigen::VectorXd beta = Eigen::VectorXd::Random(5);
  Eigen::MatrixXd omega = random_spd(eng, 5);
  WindowGram g = make_gram(a, b);
  Eigen::VectorXd expect = beta + omega.transpose() * (b - a * beta);
  CHECK((debias(g, beta, omega) - expect).lpNorm<Eigen::Infinity>() < 1e-12);
  CHECK_THROWS_AS(debias(g, Eigen::VectorXd::Zero(4), omega), UsageError);
  CHECK_THROWS_AS(debias(g, beta, Eigen::MatrixXd::Zero(4, 4)), UsageError);
}

TEST_CASE("window selector at slack bound returns zero") {
  std::mt19937_64 eng(6);
  Eigen::MatrixXd a = random_spd(eng, 3);
  Eigen::VectorXd b(3);
  b << 0.2, -0.15, 0.1;
  WindowGram g = make_gram(a, b);
  Eigen::VectorXd beta = instant_beta(g, 0.25);
  CHECK(beta.lpNorm<Eigen::Infinity>() == 0.0);
  CHECK(beta.size() == 3);
}

TEST_CASE("window selector on the identity soft-thresholds the target") {
  Eigen::VectorXd b(3);
  b << 0.8, -0.3, 0.05;
  WindowGram g = make_gram(Eigen::MatrixXd::Identity(3, 3), b);
  const double lambda = 0.1;
  Eigen::VectorXd beta = instant_beta(g, lambda);
  for (int j = 0; j < 3; ++j)
    CHECK(beta[j] ==
          doctest::Approx(oracle::soft_threshold(b[j], lambda)).epsilon(1e-9));
}

TEST_CASE("degenerate windows yield zero estimates") {
  WindowGram g;
  g.p_full = 4;
  g.degenerate = true;
  Eigen::VectorXd beta = instant_beta(g, 0.1);
  CHECK(beta.size() == 4);
  CHECK(beta.lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("infeasible selector systems throw") {
  Eigen::MatrixXd a(2, 2);
  a << 1.0, 1.0, 1.0, 1.0;
  Eigen::VectorXd b(2);
  b << 1.0, 0.0;  // |s - 1| and |s| cannot both be <= 0.2
  WindowGram g = make_gram(a, b);
  CHECK_THROWS_AS(instant_beta(g, 0.2), NumericalError);
}

TEST_CASE("window precision estimates") {
  WindowGram id = make_gram(Eigen::MatrixXd::Identity(3, 3),
                            Eigen::VectorXd::Zero(3));
  Eigen::MatrixXd om = instant_precision(id, 0.2);
  CHECK((om - 0.8 * Eigen::MatrixXd::Identity(3, 3)).lpNorm<Eigen::Infinity>() <
        1e-9);

  std::mt19937_64 eng(7);
  Eigen::MatrixXd a = random_spd(eng, 4);
  WindowGram g = make_gram(a, Eigen::VectorXd::Zero(4));
  Eigen::MatrixXd exact = instant_precision(g, 0.0);
  CHECK((exact - a.inverse()).lpNorm<Eigen::Infinity>() < 1e-6);

  const double tau = 0.15;
  Eigen::MatrixXd banded = instant_precision(g, tau);
  for (int j = 0; j < 4; ++j) {
    const double gap = (a * banded.col(j) - Eigen::VectorXd::Unit(4, j))
                           .lpNorm<Eigen::Infinity>();
    CHECK(gap <= tau + 1e-8);
  }
}

TEST_CASE("unstandardization rescales by the ratio of deviations") {
  WindowGram g = make_gram(Eigen::MatrixXd::Identity(2, 2),
                           Eigen::VectorXd::Zero(2));
  g.scales.y_sd = 0.4;
  g.scales.x_sd = Eigen::Vector2d(2.0, 0.1);
  Eigen::VectorXd std_beta(2);
  std_beta << 1.0, -0.5;
  Eigen::VectorXd raw = unstandardize(g, std_beta);
  CHECK(raw[0] == doctest::Approx(0.2).epsilon(1e-14));   // 1.0 * 0.4 / 2.0
  CHECK(raw[1] == doctest::Approx(-2.0).epsilon(1e-14));  // -0.5 * 0.4 / 0.1
  CHECK_THROWS_AS(unstandardize(g, Eigen::VectorXd::Zero(5)), UsageError);
}

TEST_CASE("pipeline runs are bitwise repeatable") {
  DgpSpec dgp;
  dgp.p = 8;
  dgp.n_all = 500;
  SimOutput sim = simulate_paths(dgp, 71);
  TuningConfig cfg;  // full grids
  TedFit a = ted_pipeline(sim.panel, cfg);
  TedFit b = ted_pipeline(sim.panel, cfg);
  CHECK((a.ibeta.raw - b.ibeta.raw).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK((a.ibeta.thresholded - b.ibeta.thresholded)
            .lpNorm<Eigen::Infinity>() == 0.0);
  CHECK(a.resolved.c_lambda == b.resolved.c_lambda);
  CHECK(a.resolved.c_tau == b.resolved.c_tau);
}

TEST_CASE("pipeline reporting ties out") {
  DgpSpec dgp;
  dgp.p = 6;
  dgp.n_all = 600;
  SimOutput sim = simulate_paths(dgp, 72);
  TuningConfig cfg;
  cfg.c_lambda = TuneParam::fixed_at(1.5);
  cfg.c_tau = TuneParam::fixed_at(1.2);
  cfg.k_n = 30;
  TedFit fit = ted_pipeline(sim.panel, cfg);

  CHECK(fit.resolved.k_n == 30);
  CHECK(fit.instants.k_n == 30);
  CHECK(fit.instants.windows.size() == 20);
  CHECK(fit.resolved.c_lambda == 1.5);
  CHECK(fit.resolved.c_tau == 1.2);
  CHECK(fit.resolved.c_h == 0.5);
  // resolved block carries the rate-formula values; the instant block the
  // bound actually imposed on the correlation system, smaller by k_n / n
  CHECK(fit.resolved.lambda_n ==
        doctest::Approx(lambda_rate(600, 6, 1.5)).epsilon(1e-14));
  CHECK(fit.instants.lambda_n ==
        doctest::Approx(lambda_rate(600, 6, 1.5) * 30.0 / 600.0)
            .epsilon(1e-14));
  CHECK(fit.instants.tau_n ==
        doctest::Approx(tau_rate(600, 6, 1.2)).epsilon(1e-14));
  CHECK(fit.resolved.h_n ==
        doctest::Approx(h_rate(600, 6, 0.5)).epsilon(1e-14));
  CHECK(fit.ibeta.h_n == fit.resolved.h_n);
  CHECK(fit.ibeta.method == "ted");
  CHECK(fit.lambda_table.candidates.empty());  // fixed constants: no sweep
  CHECK(fit.tau_table.candidates.empty());

  CHECK(fit.instants.max_dantzig_gap <= 1e-8);
  CHECK(fit.instants.max_clime_gap <= 1e-8);
  for (const WindowEstimate& w : fit.instants.windows) {
    CHECK(w.dantzig_gap <= 1e-8);
    CHECK(w.clime_gap <= 1e-8);
    CHECK(w.dantzig_gap <= fit.instants.max_dantzig_gap + 1e-15);
  }
}

TEST_CASE("tuned pipeline fills the selection tables") {
  DgpSpec dgp;
  dgp.p = 5;
  dgp.n_all = 400;
  SimOutput sim = simulate_paths(dgp, 73);
  TuningConfig cfg;
  cfg.c_lambda = TuneParam::over({0.5, 1.0, 2.0});
  cfg.c_tau = TuneParam::over({0.8, 1.6});
  TedFit fit = ted_pipeline(sim.panel, cfg);
  CHECK(fit.lambda_table.candidates.size() == 3);
  CHECK(fit.tau_table.candidates.size() == 2);
  CHECK(fit.lambda_table.chosen_value() == fit.resolved.c_lambda);
  CHECK(fit.tau_table.chosen_value() == fit.resolved.c_tau);
}

TEST_CASE("per-window selector estimates have minimal l1 norm") {
  DgpSpec dgp;
  dgp.p = 4;
  dgp.n_all = 900;
  SimOutput sim = simulate_paths(dgp, 74);
  TuningConfig cfg;
  cfg.c_lambda = TuneParam::fixed_at(1.0);
  cfg.c_tau = TuneParam::fixed_at(1.0);
  PreparedPanel prep = prepare_panel(sim.panel, 0, true);
  TedFit fit = ted_pipeline(prep, cfg);
  REQUIRE(fit.instants.windows.size() == prep.grams.size());
  for (size_t w = 0; w < prep.grams.size(); ++w) {
    const WindowGram& g = prep.grams[w];
    if (g.degenerate || g.cols.empty()) continue;
    // unpenalized least squares solves the constraint exactly, so it is
    // always feasible and the selector can never exceed its l1 norm
    Eigen::VectorXd ls = g.a.fullPivLu().solve(g.bvec);
    CHECK(fit.instants.windows[w].dantzig_std.lpNorm<1>() <=
          ls.lpNorm<1>() + 1e-9);
  }
}

TEST_CASE("zero-variance regressors pass through as zeros") {
  DgpSpec dgp;
  dgp.p = 3;
  dgp.n_all = 300;
  SimOutput sim = simulate_paths(dgp, 75);
  LogPricePanel panel = sim.panel;
  panel.x.col(1).setConstant(4.2);  // flat path, zero increments
  TuningConfig cfg;
  cfg.c_lambda = TuneParam::fixed_at(1.0);
  cfg.c_tau = TuneParam::fixed_at(1.0);
  TedFit fit = ted_pipeline(panel, cfg);
  CHECK(fit.ibeta.raw[1] == 0.0);
  CHECK(fit.ibeta.thresholded[1] == 0.0);
  CHECK(fit.ibeta.raw.allFinite());
  for (const WindowEstimate& w : fit.instants.windows) {
    CHECK(w.dantzig_raw[1] == 0.0);
    CHECK(w.debiased_raw[1] == 0.0);
  }
}

TEST_CASE("windows with a flat response are skipped") {
  std::mt19937_64 eng(76);
  std::normal_distribution<double> gd(0.0, 0.01);
  const int n = 100, k = 25;
  LogPricePanel panel;
  panel.times.resize(n + 1);
  panel.y.resize(n + 1);
  panel.x.resize(n + 1, 2);
  panel.y[0] = 0.0;
  panel.x.row(0).setZero();
  for (int i = 0; i < n; ++i) {
    panel.times[i] = static_cast<double>(i) / n;
    const double dy = (i < k) ? 0.0 : gd(eng);  // first window flat in y
    panel.y[i + 1] = panel.y[i] + dy;
    panel.x(i + 1, 0) = panel.x(i, 0) + gd(eng);
    panel.x(i + 1, 1) = panel.x(i, 1) + gd(eng);
  }
  panel.times[n] = 1.0;
  TuningConfig cfg;
  cfg.c_lambda = TuneParam::fixed_at(1.0);
  cfg.c_tau = TuneParam::fixed_at(1.0);
  cfg.k_n = k;
  cfg.truncation = false;
  TedFit fit = ted_pipeline(panel, cfg);
  REQUIRE(fit.instants.windows.size() == 4);
  CHECK(fit.instants.windows[0].degenerate);
  CHECK(fit.instants.windows[0].debiased_raw.lpNorm<Eigen::Infinity>() == 0.0);
  CHECK_FALSE(fit.instants.windows[1].degenerate);
  CHECK(fit.ibeta.raw.allFinite());
}

TEST_CASE("threshold rule selection changes only the final step") {
  DgpSpec dgp;
  dgp.p = 5;
  dgp.n_all = 500;
  SimOutput sim = simulate_paths(dgp, 77);
  TuningConfig hard_cfg;
  hard_cfg.c_lambda = TuneParam::fixed_at(1.0);
  hard_cfg.c_tau = TuneParam::fixed_at(1.0);
  TuningConfig soft_cfg = hard_cfg;
  soft_cfg.rule = ThresholdRule::soft;
  TedFit hard = ted_pipeline(sim.panel, hard_cfg);
  TedFit soft = ted_pipeline(sim.panel, soft_cfg);
  CHECK((hard.ibeta.raw - soft.ibeta.raw).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK((hard.ibeta.thresholded -
         threshold(hard.ibeta.raw, hard.ibeta.h_n, ThresholdRule::hard))
            .lpNorm<Eigen::Infinity>() == 0.0);
  CHECK((soft.ibeta.thresholded -
         threshold(soft.ibeta.raw, soft.ibeta.h_n, ThresholdRule::soft))
            .lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("grid-tuned threshold constant is rejected on a single panel") {
  DgpSpec dgp;
  dgp.p = 3;
  dgp.n_all = 200;
  SimOutput sim = simulate_paths(dgp, 78);
  TuningConfig cfg;
  cfg.c_h = TuneParam::over({0.0, 0.5});
  CHECK_THROWS_AS(ted_pipeline(sim.panel, cfg), UsageError);
}

TEST_CASE("noise-free constant coefficients are recovered to rounding") {
  DgpSpec dgp;
  dgp.p = 5;
  dgp.s_p = 2;
  dgp.n_all = 1000;
  dgp.regime = BetaRegime::constant;
  dgp.jump_intensity_x = 0.0;
  dgp.jump_intensity_y = 0.0;
  dgp.nu = OuParams{3.0, 0.0, 0.0, 0.0};
  SimOutput sim = simulate_paths(dgp, 79);
  TuningConfig cfg;
  cfg.truncation = false;
  TedFit fit = ted_pipeline(sim.panel, cfg);
  for (int j = 0; j < 5; ++j)
    CHECK(std::abs(fit.ibeta.thresholded[j] - sim.true_integrated_beta[j]) <
          1e-2);
}
