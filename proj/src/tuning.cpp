#include "tedbeta/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tedbeta/errors.hpp"
#include "tedbeta/l1opt.hpp"

namespace tedbeta {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kDfTol = 1e-10;  // |beta_j| above this counts as selected

std::vector<double> checked_grid(std::vector<double> grid) {
  if (grid.empty()) throw UsageError("tuning grid is empty");
  for (double c : grid)
    if (!(c >= 0.0) || !std::isfinite(c))
      throw UsageError("tuning grid entries must be finite and >= 0");
  std::sort(grid.begin(), grid.end());
  return grid;
}

int argmin_ascending(const std::vector<double>& loss) {
  int best = -1;
  for (size_t i = 0; i < loss.size(); ++i) {
    const double v = std::isnan(loss[i]) ? kInf : loss[i];
    if (v == kInf) continue;
    if (best == -1 || v < loss[best]) best = static_cast<int>(i);
  }
  return best;
}

}  // namespace

std::vector<double> default_c_grid() {
  std::vector<double> g(25);
  const double lo = std::log(0.1), hi = std::log(10.0);
  for (int i = 0; i < 25; ++i)
    g[i] = std::exp(lo + (hi - lo) * i / 24.0);
  return g;
}

std::vector<double> default_ch_grid() {
  return {0.0, 0.1, 0.2, 0.3, 0.4, 0.5};
}

double lambda_rate(int n, int p, double c) {
  if (n < 1 || p < 1) throw UsageError("rates need n >= 1, p >= 1");
  return c * std::pow(static_cast<double>(n), -0.25) *
         std::pow(std::log(static_cast<double>(p)), 1.5);
}

double tau_rate(int n, int p, double c) {
  if (n < 1 || p < 1) throw UsageError("rates need n >= 1, p >= 1");
  return c * std::pow(static_cast<double>(n), -0.25) *
         std::sqrt(std::log(static_cast<double>(p)));
}

double h_rate(int n, int p, double c) {
  if (n < 1 || p < 1) throw UsageError("rates need n >= 1, p >= 1");
  return c * std::pow(static_cast<double>(n), -0.5) *
         std::pow(std::log(static_cast<double>(p)), 1.5);
}

RateScalings rate_scalings(int n, int p, double c_lambda, double c_tau,
                           double c_h) {
  return RateScalings{lambda_rate(n, p, c_lambda), tau_rate(n, p, c_tau),
                      h_rate(n, p, c_h)};
}

LambdaSelection select_c_lambda_bic(const PreparedPanel& prep,
                                    std::vector<double> grid) {
  const auto cand = checked_grid(std::move(grid));
  const int nc = static_cast<int>(cand.size());
  const int nw = static_cast<int>(prep.grams.size());
  if (nw == 0) throw UsageError("no windows to tune on");

  // Solve every window along the grid from the largest lambda down; each step
  // is a warm start.  Betas are small (active dims), so keep them all and
  // read off the winning column afterwards.
  std::vector<std::vector<Eigen::VectorXd>> betas(
      nc, std::vector<Eigen::VectorXd>(nw));
  std::vector<double> bic(nc, 0.0);
  std::vector<bool> usable(nc, true);
  double max_gap = -kInf;

  for (int w = 0; w < nw; ++w) {
    const WindowGram& g = prep.grams[w];
    if (g.degenerate || g.cols.empty()) continue;
    LinfL1Solver solver(g.a);
    solver.set_target(g.bvec);
    for (int i = nc - 1; i >= 0; --i) {
      // the rate is stated for the Gram scaled by 1/(k_n Δ_n) = n/k_n; the
      // stored Gram is the correlation form, smaller by k_n/n, so the bound
      // shrinks by the same factor.
      const double lam = lambda_rate(prep.n, prep.p, cand[i]) * prep.k_n /
                         static_cast<double>(prep.n);
      const L1Solution sol = solver.solve(lam);
      if (sol.status != SolveStatus::optimal) {
        usable[i] = false;
        solver.set_target(g.bvec);  // drop the broken basis
        continue;
      }
      max_gap = std::max(max_gap, sol.feasibility_gap);
      betas[i][w] = sol.beta;
      const double k = g.k;
      double rss =
          k * (1.0 - 2.0 * sol.beta.dot(g.bvec) +
               sol.beta.dot(g.a * sol.beta));
      rss = std::max(rss, 1e-300 * k);
      int df = 0;
      for (int j = 0; j < sol.beta.size(); ++j)
        if (std::abs(sol.beta[j]) > kDfTol) ++df;
      bic[i] += k * std::log(rss / k) + std::log(k) * df;
    }
  }

  LambdaSelection out;
  out.table.candidates = cand;
  out.table.loss.resize(nc);
  for (int i = 0; i < nc; ++i)
    out.table.loss[i] = usable[i] ? bic[i] : kInf;
  out.table.chosen = argmin_ascending(out.table.loss);
  if (out.table.chosen < 0)
    throw NumericalError("no usable c_lambda candidate");
  out.c_lambda = cand[out.table.chosen];
  out.betas = std::move(betas[out.table.chosen]);
  out.max_gap = max_gap;
  return out;
}

LambdaSelection select_c_lambda_bic(const LogPricePanel& panel,
                                    std::vector<double> grid, int k_n,
                                    bool truncation) {
  return select_c_lambda_bic(prepare_panel(panel, k_n, truncation),
                             std::move(grid));
}

TauSelection select_c_tau_trace(const PreparedPanel& prep,
                                std::vector<double> grid) {
  const auto cand = checked_grid(std::move(grid));
  const int nc = static_cast<int>(cand.size());
  const int nw = static_cast<int>(prep.grams.size());
  if (nw == 0) throw UsageError("no windows to tune on");

  std::vector<double> loss(nc, 0.0);
  std::vector<bool> usable(nc, true);
  // Candidates below this ascending-order position are known infeasible:
  // once a precision column fails at some tau it fails for all smaller tau
  // as well, so the descending sweep stops early and the bound only grows.
  int degenerate_from = 0;
  double deficit = 0.0;      // inactive-coordinate contribution, tau-free

  for (int w = 0; w < nw; ++w) {
    const WindowGram& g = prep.grams[w];
    const int pa = static_cast<int>(g.cols.size());
    deficit += static_cast<double>(g.p_full - pa);
    if (pa == 0) continue;
    LinfL1Solver solver(g.a);
    for (int j = 0; j < pa; ++j) {
      const Eigen::VectorXd ej = Eigen::VectorXd::Unit(pa, j);
      solver.set_target(ej);
      for (int i = nc - 1; i >= degenerate_from; --i) {
        const double tau = tau_rate(prep.n, prep.p, cand[i]);
        const L1Solution sol = solver.solve(tau);
        if (sol.status == SolveStatus::infeasible) {
          degenerate_from = i + 1;
          break;
        }
        if (sol.status != SolveStatus::optimal) {
          usable[i] = false;
          solver.set_target(ej);
          continue;
        }
        loss[i] += (g.a * sol.beta - ej).squaredNorm();
      }
    }
  }

  TauSelection out;
  out.table.candidates = cand;
  out.table.loss.resize(nc);
  for (int i = 0; i < nc; ++i) {
    const bool ok = usable[i] && i >= degenerate_from;
    out.table.loss[i] = ok ? loss[i] + deficit : kInf;
  }
  out.table.chosen = argmin_ascending(out.table.loss);
  if (out.table.chosen < 0)
    throw NumericalError(
        "every c_tau candidate leaves the precision problem infeasible");
  out.c_tau = cand[out.table.chosen];

  // Second pass: recover the precision matrices at the winning constant.
  const double tau = tau_rate(prep.n, prep.p, out.c_tau);
  out.omegas.resize(nw);
  double max_gap = -kInf;
  for (int w = 0; w < nw; ++w) {
    const WindowGram& g = prep.grams[w];
    const int pa = static_cast<int>(g.cols.size());
    if (pa == 0) {
      out.omegas[w] = Eigen::MatrixXd::Zero(0, 0);
      continue;
    }
    const ClimeResult res = solve_clime_detailed(g.a, tau);
    if (!res.ok())
      throw NumericalError("precision solve failed at the selected c_tau");
    out.omegas[w] = res.omega;
    max_gap = std::max(max_gap, res.max_gap);
  }
  out.max_gap = max_gap;
  return out;
}

TauSelection select_c_tau_trace(const LogPricePanel& panel,
                                std::vector<double> grid, int k_n,
                                bool truncation) {
  return select_c_tau_trace(prepare_panel(panel, k_n, truncation),
                            std::move(grid));
}

}  // namespace tedbeta
