#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "tedbeta/windows.hpp"

namespace tedbeta {

enum class ThresholdRule { hard, soft };

// A tuning constant: either pinned to a value or searched over a grid.
struct TuneParam {
  std::optional<double> fixed;
  std::vector<double> grid;

  static TuneParam fixed_at(double v) { return TuneParam{v, {}}; }
  static TuneParam over(std::vector<double> g) {
    return TuneParam{std::nullopt, std::move(g)};
  }
};

std::vector<double> default_c_grid();   // 25 log-spaced points on [0.1, 10]
std::vector<double> default_ch_grid();  // {0.0, 0.1, ..., 0.5}

// Rate maps from constants to the actual regularization levels (natural log):
//   lambda_n = c * n^{-1/4} (log p)^{3/2}
//   tau_n    = c * n^{-1/4} (log p)^{1/2}
//   h_n      = c * n^{-1/2} (log p)^{3/2}
double lambda_rate(int n, int p, double c);
double tau_rate(int n, int p, double c);
double h_rate(int n, int p, double c);

struct RateScalings {
  double lambda_n = 0.0, tau_n = 0.0, h_n = 0.0;
};
RateScalings rate_scalings(int n, int p, double c_lambda, double c_tau,
                           double c_h);

// Full configuration of the thresholded debiased estimator.  c_h has no
// single-panel selection rule, so its default is the fixed value that the
// prediction-error criterion lands on for daily equity panels.
struct TuningConfig {
  TuneParam c_lambda = TuneParam::over(default_c_grid());
  TuneParam c_tau = TuneParam::over(default_c_grid());
  TuneParam c_h = TuneParam::fixed_at(0.5);
  int k_n = 0;  // 0 -> floor(sqrt(n))
  ThresholdRule rule = ThresholdRule::hard;
  bool truncation = true;
};

struct SelectionTable {
  std::vector<double> candidates;  // ascending
  std::vector<double> loss;        // +inf marks an unusable candidate
  int chosen = -1;

  double chosen_value() const { return candidates.at(chosen); }
};

// Picks c_lambda by the block-summed information criterion
//   sum_i [ k_n log(RSS_i / k_n) + log(k_n) df_i ],
// where RSS_i and the nonzero count df_i come from the per-window solve at
// lambda_n(c).  Ties go to the smaller constant; the candidate order does not
// affect the result (the grid is sorted internally).
struct LambdaSelection {
  double c_lambda = 0.0;
  SelectionTable table;
  // Per-window solutions at the chosen constant (active dims), reused by the
  // pipeline so the winning solve is not repeated.
  std::vector<Eigen::VectorXd> betas;
  double max_gap = 0.0;
};
LambdaSelection select_c_lambda_bic(const PreparedPanel& prep,
                                    std::vector<double> grid);
LambdaSelection select_c_lambda_bic(const LogPricePanel& panel,
                                    std::vector<double> grid, int k_n = 0,
                                    bool truncation = true);

// Picks c_tau by the summed trace loss  sum_i || a_i omega - I ||_F^2 over
// windows.  Candidates for which any precision column is infeasible are
// excluded; feasibility is monotone in tau, so the search walks the grid
// downward and stops at the first failure.
struct TauSelection {
  double c_tau = 0.0;
  SelectionTable table;
  std::vector<Eigen::MatrixXd> omegas;  // per window, active dims, chosen tau
  double max_gap = 0.0;
};
TauSelection select_c_tau_trace(const PreparedPanel& prep,
                                std::vector<double> grid);
TauSelection select_c_tau_trace(const LogPricePanel& panel,
                                std::vector<double> grid, int k_n = 0,
                                bool truncation = true);

// Picks c_h by one-period-ahead prediction: threshold the current period's
// raw integrated estimate at each candidate and score it against the next
// period's raw estimate in squared l2.  Needs >= 2 consecutive panels.
// (Defined with the pipeline; declared here with the other selectors.)
struct ChSelection {
  double c_h = 0.0;
  SelectionTable table;
};
ChSelection select_c_h_mspe(const std::vector<LogPricePanel>& periods,
                            const TuningConfig& cfg, std::vector<double> grid);

}  // namespace tedbeta
