#include "tedbeta/ted.hpp"

#include <algorithm>
#include <cmath>

#include "tedbeta/errors.hpp"
#include "tedbeta/l1opt.hpp"

namespace tedbeta {

namespace {

Eigen::VectorXd scatter(const WindowGram& g, const Eigen::VectorXd& active) {
  Eigen::VectorXd full = Eigen::VectorXd::Zero(g.p_full);
  for (size_t j = 0; j < g.cols.size(); ++j) full[g.cols[j]] = active[j];
  return full;
}

Eigen::VectorXd gather(const WindowGram& g, const Eigen::VectorXd& full) {
  Eigen::VectorXd active(g.cols.size());
  for (size_t j = 0; j < g.cols.size(); ++j) active[j] = full[g.cols[j]];
  return active;
}

}  // namespace

Eigen::VectorXd instant_beta(const WindowGram& g, double lambda_n) {
  if (g.degenerate || g.cols.empty())
    return Eigen::VectorXd::Zero(g.p_full);
  L1LinfProblem prob;
  prob.a = g.a;
  prob.b = g.bvec;
  prob.lambda = lambda_n;
  const L1Solution sol = solve_l1_linf(prob);
  if (sol.status == SolveStatus::infeasible)
    throw NumericalError("window selector problem infeasible");
  if (sol.status != SolveStatus::optimal)
    throw NumericalError("window selector solve failed");
  return scatter(g, sol.beta);
}

Eigen::MatrixXd instant_precision(const WindowGram& g, double tau_n) {
  Eigen::MatrixXd full = Eigen::MatrixXd::Zero(g.p_full, g.p_full);
  if (g.cols.empty()) return full;
  const Eigen::MatrixXd omega = solve_clime(g.a, tau_n);
  for (size_t cj = 0; cj < g.cols.size(); ++cj)
    for (size_t ci = 0; ci < g.cols.size(); ++ci)
      full(g.cols[ci], g.cols[cj]) = omega(ci, cj);
  return full;
}

Eigen::VectorXd debias(const WindowGram& g, const Eigen::VectorXd& beta_std,
                       const Eigen::MatrixXd& omega_std) {
  if (beta_std.size() != g.p_full || omega_std.rows() != g.p_full ||
      omega_std.cols() != g.p_full)
    throw UsageError("debias inputs must be full-width");
  const Eigen::VectorXd ba = gather(g, beta_std);
  Eigen::MatrixXd oa(g.cols.size(), g.cols.size());
  for (size_t cj = 0; cj < g.cols.size(); ++cj)
    for (size_t ci = 0; ci < g.cols.size(); ++ci)
      oa(ci, cj) = omega_std(g.cols[ci], g.cols[cj]);
  const Eigen::VectorXd corrected =
      ba + oa.transpose() * (g.bvec - g.a * ba);
  return scatter(g, corrected);
}

Eigen::VectorXd unstandardize(const WindowGram& g,
                              const Eigen::VectorXd& beta_std) {
  if (beta_std.size() != g.p_full)
    throw UsageError("unstandardize input must be full-width");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(g.p_full);
  if (g.degenerate) return out;
  for (int j : g.cols)
    out[j] = beta_std[j] * g.scales.y_sd / g.scales.x_sd[j];
  return out;
}

Eigen::VectorXd integrate(const std::vector<Eigen::VectorXd>& window_betas,
                          int k_n, int n) {
  if (window_betas.empty()) throw UsageError("no windows to integrate");
  if (k_n < 1 || n < k_n) throw UsageError("integrate: bad k_n or n");
  const double weight = static_cast<double>(k_n) / n;
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(window_betas.front().size());
  for (const auto& b : window_betas) {
    if (b.size() != acc.size())
      throw UsageError("integrate: inconsistent widths");
    acc += weight * b;
  }
  return acc;
}

Eigen::VectorXd threshold(const Eigen::VectorXd& raw, double h_n,
                          ThresholdRule rule) {
  if (!(h_n >= 0.0)) throw UsageError("threshold level must be >= 0");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(raw.size());
  for (int j = 0; j < raw.size(); ++j) {
    const double v = raw[j];
    if (std::abs(v) < h_n) continue;
    out[j] = (rule == ThresholdRule::hard)
                 ? v
                 : v - (v > 0.0 ? h_n : -h_n);
  }
  return out;
}

TedFit ted_pipeline(const LogPricePanel& panel, const TuningConfig& cfg) {
  return ted_pipeline(prepare_panel(panel, cfg.k_n, cfg.truncation), cfg);
}

TedFit ted_pipeline(const PreparedPanel& prep, const TuningConfig& cfg) {
  if (!cfg.c_h.fixed.has_value())
    throw UsageError(
        "c_h cannot be grid-tuned on a single panel; fix it or run the "
        "multi-period selector");
  const int nw = static_cast<int>(prep.grams.size());
  if (nw == 0) throw UsageError("panel too short for the chosen k_n");

  TedFit fit;
  fit.resolved.k_n = prep.k_n;
  fit.resolved.c_h = *cfg.c_h.fixed;
  fit.instants.k_n = prep.k_n;

  // Resolve the two solver constants, reusing the winning solves when a grid
  // search ran.
  std::vector<Eigen::VectorXd> beta_cache;
  std::vector<Eigen::MatrixXd> omega_cache;
  if (cfg.c_lambda.fixed.has_value()) {
    fit.resolved.c_lambda = *cfg.c_lambda.fixed;
  } else {
    LambdaSelection sel = select_c_lambda_bic(prep, cfg.c_lambda.grid);
    fit.resolved.c_lambda = sel.c_lambda;
    fit.lambda_table = std::move(sel.table);
    beta_cache = std::move(sel.betas);
    fit.instants.max_dantzig_gap =
        std::max(fit.instants.max_dantzig_gap, sel.max_gap);
  }
  if (cfg.c_tau.fixed.has_value()) {
    fit.resolved.c_tau = *cfg.c_tau.fixed;
  } else {
    TauSelection sel = select_c_tau_trace(prep, cfg.c_tau.grid);
    fit.resolved.c_tau = sel.c_tau;
    fit.tau_table = std::move(sel.table);
    omega_cache = std::move(sel.omegas);
    fit.instants.max_clime_gap =
        std::max(fit.instants.max_clime_gap, sel.max_gap);
  }
  const RateScalings rates = rate_scalings(
      prep.n, prep.p, fit.resolved.c_lambda, fit.resolved.c_tau,
      fit.resolved.c_h);
  fit.resolved.lambda_n = rates.lambda_n;
  fit.resolved.tau_n = rates.tau_n;
  fit.resolved.h_n = rates.h_n;
  // lambda_n is stated for the Gram scaled by 1/(k_n Δ_n) = n/k_n; the stored
  // Gram is the correlation form, smaller by k_n/n, so the imposed bound
  // shrinks accordingly.  CLIME is invariant to that scale change (rescaling
  // Ω restores the identity target), so tau_n applies to the correlation
  // form as-is.
  const double lam_eff =
      rates.lambda_n * prep.k_n / static_cast<double>(prep.n);
  fit.instants.lambda_n = lam_eff;
  fit.instants.tau_n = rates.tau_n;

  fit.instants.windows.resize(nw);
  std::vector<Eigen::VectorXd> raw_betas(nw);
  for (int w = 0; w < nw; ++w) {
    const WindowGram& g = prep.grams[w];
    WindowEstimate& est = fit.instants.windows[w];
    est.precision = Eigen::MatrixXd::Zero(g.p_full, g.p_full);
    est.dantzig_std = Eigen::VectorXd::Zero(g.p_full);
    est.debiased_std = Eigen::VectorXd::Zero(g.p_full);
    est.dantzig_raw = Eigen::VectorXd::Zero(g.p_full);
    est.debiased_raw = Eigen::VectorXd::Zero(g.p_full);
    if (g.degenerate || g.cols.empty()) {
      est.degenerate = true;
      raw_betas[w] = est.debiased_raw;
      continue;
    }
    const int pa = static_cast<int>(g.cols.size());

    Eigen::VectorXd beta_a;
    if (w < static_cast<int>(beta_cache.size()) &&
        beta_cache[w].size() == pa) {
      beta_a = beta_cache[w];
    } else {
      L1LinfProblem prob;
      prob.a = g.a;
      prob.b = g.bvec;
      prob.lambda = lam_eff;
      const L1Solution sol = solve_l1_linf(prob);
      if (sol.status != SolveStatus::optimal)
        throw NumericalError("window selector solve failed");
      beta_a = sol.beta;
    }
    est.dantzig_gap =
        (g.a * beta_a - g.bvec).lpNorm<Eigen::Infinity>() - lam_eff;

    Eigen::MatrixXd omega_a;
    if (w < static_cast<int>(omega_cache.size()) &&
        omega_cache[w].rows() == pa) {
      omega_a = omega_cache[w];
    } else {
      omega_a = solve_clime(g.a, rates.tau_n);
    }
    double cg = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < pa; ++j)
      cg = std::max(cg, (g.a * omega_a.col(j) -
                         Eigen::VectorXd::Unit(pa, j))
                                .lpNorm<Eigen::Infinity>() -
                            rates.tau_n);
    est.clime_gap = cg;

    const Eigen::VectorXd corrected =
        beta_a + omega_a.transpose() * (g.bvec - g.a * beta_a);

    est.dantzig_std = scatter(g, beta_a);
    est.debiased_std = scatter(g, corrected);
    for (size_t cj = 0; cj < g.cols.size(); ++cj)
      for (size_t ci = 0; ci < g.cols.size(); ++ci)
        est.precision(g.cols[ci], g.cols[cj]) = omega_a(ci, cj);
    est.dantzig_raw = unstandardize(g, est.dantzig_std);
    est.debiased_raw = unstandardize(g, est.debiased_std);
    raw_betas[w] = est.debiased_raw;

    fit.instants.max_dantzig_gap =
        std::max(fit.instants.max_dantzig_gap, est.dantzig_gap);
    fit.instants.max_clime_gap =
        std::max(fit.instants.max_clime_gap, est.clime_gap);
  }

  fit.ibeta.raw = integrate(raw_betas, prep.k_n, prep.n);
  fit.ibeta.h_n = rates.h_n;
  fit.ibeta.rule = cfg.rule;
  fit.ibeta.thresholded = threshold(fit.ibeta.raw, rates.h_n, cfg.rule);
  fit.ibeta.method = "ted";
  return fit;
}

ChSelection select_c_h_mspe(const std::vector<LogPricePanel>& periods,
                            const TuningConfig& cfg,
                            std::vector<double> grid) {
  if (periods.size() < 2)
    throw UsageError("threshold selection needs at least two periods");
  if (grid.empty()) throw UsageError("tuning grid is empty");
  std::sort(grid.begin(), grid.end());
  for (double c : grid)
    if (!(c >= 0.0) || !std::isfinite(c))
      throw UsageError("tuning grid entries must be finite and >= 0");

  // The raw integrated estimate does not depend on c_h, so fit each period
  // once and reuse it for every candidate.
  struct PeriodFit {
    Eigen::VectorXd raw;
    int n = 0, p = 0;
  };
  std::vector<PeriodFit> fits;
  fits.reserve(periods.size());
  TuningConfig base = cfg;
  base.c_h = TuneParam::fixed_at(0.0);
  for (const auto& panel : periods) {
    TedFit f = ted_pipeline(panel, base);
    fits.push_back(PeriodFit{f.ibeta.raw, panel.n(), panel.p()});
  }

  ChSelection out;
  out.table.candidates = grid;
  out.table.loss.resize(grid.size());
  for (size_t i = 0; i < grid.size(); ++i) {
    double acc = 0.0;
    for (size_t m = 0; m + 1 < fits.size(); ++m) {
      const double h = h_rate(fits[m].n, fits[m].p, grid[i]);
      const Eigen::VectorXd pred = threshold(fits[m].raw, h, cfg.rule);
      acc += (pred - fits[m + 1].raw).squaredNorm();
    }
    out.table.loss[i] = acc / static_cast<double>(fits.size() - 1);
  }
  out.table.chosen = 0;
  for (size_t i = 1; i < grid.size(); ++i)
    if (out.table.loss[i] < out.table.loss[out.table.chosen])
      out.table.chosen = static_cast<int>(i);
  out.c_h = grid[out.table.chosen];
  return out;
}

}  // namespace tedbeta
