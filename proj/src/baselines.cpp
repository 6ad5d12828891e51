#include "tedbeta/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "tedbeta/errors.hpp"
#include "tedbeta/l1opt.hpp"
#include "tedbeta/tuning.hpp"
#include "tedbeta/windows.hpp"

namespace tedbeta {

int auto_big_k_n(int n) {
  if (n < 1) throw UsageError("auto_big_k_n: need n >= 1");
  int k = static_cast<int>(std::floor(std::pow(static_cast<double>(n), 0.47)));
  return std::clamp(k, 1, n);
}

namespace {

IncrementMatrix prepared_increments(const LogPricePanel& panel,
                                    bool truncation) {
  panel.validate();
  IncrementMatrix incr = increments(panel);
  if (truncation) incr = truncate(incr, truncation_levels(incr));
  return incr;
}

// Full column set when no subset is requested; otherwise the requested
// columns, validated but kept in caller order.
std::vector<int> resolve_columns(const BaselineConfig& cfg, int p) {
  if (!cfg.factor_subset) {
    std::vector<int> cols(p);
    std::iota(cols.begin(), cols.end(), 0);
    return cols;
  }
  const std::vector<int>& cols = *cfg.factor_subset;
  if (cols.empty()) throw UsageError("factor subset must not be empty");
  for (int j : cols) {
    if (j < 0 || j >= p) {
      throw UsageError("factor subset column out of range: " +
                       std::to_string(j) + " (panel has " + std::to_string(p) +
                       " regressors)");
    }
  }
  std::vector<int> sorted = cols;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw UsageError("factor subset has duplicate columns");
  return cols;
}

}  // namespace

IntegratedBetaEstimate akx_integrated_beta(const LogPricePanel& panel,
                                           const BaselineConfig& cfg) {
  if (cfg.ridge <= 0.0) throw UsageError("ridge must be positive");
  if (cfg.big_k_n < 0) throw UsageError("window length must be >= 0");
  const IncrementMatrix incr = prepared_increments(panel, cfg.truncation);
  const int n = incr.n();
  const int p = incr.p();
  const int big_k = cfg.big_k_n > 0 ? cfg.big_k_n : auto_big_k_n(n);
  const std::vector<int> cols = resolve_columns(cfg, p);
  const int q = static_cast<int>(cols.size());

  const std::vector<WindowView> blocks = window_blocks(incr, big_k);
  Eigen::VectorXd total = Eigen::VectorXd::Zero(q);
  Eigen::MatrixXd xsub(big_k, q);
  for (const WindowView& w : blocks) {
    auto xv = w.xv();
    for (int c = 0; c < q; ++c) xsub.col(c) = xv.col(cols[c]);
    Eigen::MatrixXd xtx = xsub.transpose() * xsub;
    xtx.diagonal().array() += cfg.ridge;
    Eigen::VectorXd beta = xtx.ldlt().solve(xsub.transpose() * w.yv());
    if (!beta.allFinite())
      throw NumericalError("least-squares block solve produced non-finite "
                           "coefficients");
    total += beta;
  }

  IntegratedBetaEstimate out;
  out.raw = Eigen::VectorXd::Zero(p);
  const double weight = static_cast<double>(big_k) / static_cast<double>(n);
  for (int c = 0; c < q; ++c) out.raw[cols[c]] = total[c] * weight;
  out.thresholded = out.raw;
  out.h_n = 0.0;
  out.rule = ThresholdRule::hard;
  out.method = cfg.factor_subset ? "akx-six" : "akx";
  return out;
}

LassoFit lasso_integrated_beta(const LogPricePanel& panel,
                               const BaselineConfig& cfg) {
  const IncrementMatrix incr = prepared_increments(panel, cfg.truncation);
  const int n = incr.n();
  const int p = incr.p();

  std::vector<double> grid =
      cfg.lasso_grid.empty() ? default_c_grid() : cfg.lasso_grid;
  std::sort(grid.begin(), grid.end());
  if (grid.front() < 0.0) throw UsageError("penalty grid must be nonnegative");

  const Eigen::MatrixXd gram = incr.dx.transpose() * incr.dx;
  const Eigen::VectorXd xty = incr.dx.transpose() * incr.dy;
  const double yss = incr.dy.squaredNorm();
  constexpr double kDfTol = 1e-10;

  const int nc = static_cast<int>(grid.size());
  std::vector<double> loss(nc, std::numeric_limits<double>::infinity());
  std::vector<Eigen::VectorXd> betas(nc);
  // Walk the grid from the heaviest penalty down so each solve warm-starts
  // from a sparser neighbour.
  Eigen::VectorXd warm;
  for (int i = nc - 1; i >= 0; --i) {
    Eigen::VectorXd beta = lasso_cd_gram(gram, xty, grid[i], warm);
    warm = beta;
    double rss = yss - 2.0 * beta.dot(xty) + beta.dot(gram * beta);
    rss = std::max(rss, 1e-300 * n);
    int df = 0;
    for (int j = 0; j < p; ++j)
      if (std::abs(beta[j]) > kDfTol) ++df;
    loss[i] = n * std::log(rss / n) + std::log(static_cast<double>(n)) * df;
    betas[i] = std::move(beta);
  }

  int best = 0;
  for (int i = 1; i < nc; ++i)
    if (loss[i] < loss[best]) best = i;  // ties keep the smaller penalty

  LassoFit fit;
  fit.table.candidates = grid;
  fit.table.loss = loss;
  fit.table.chosen = best;
  fit.ibeta.raw = betas[best];
  fit.ibeta.thresholded = fit.ibeta.raw;
  fit.ibeta.h_n = 0.0;
  fit.ibeta.rule = ThresholdRule::hard;
  fit.ibeta.method = "lasso";
  return fit;
}

}  // namespace tedbeta
