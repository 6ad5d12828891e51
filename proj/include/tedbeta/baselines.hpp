#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "tedbeta/panel.hpp"
#include "tedbeta/ted.hpp"

namespace tedbeta {

struct BaselineConfig {
  int big_k_n = 0;       // window length; 0 -> floor(n^0.47)
  double ridge = 1e-4;   // added to the per-window Gram diagonal
  std::optional<std::vector<int>> factor_subset;  // 0-based columns
  std::vector<double> lasso_grid;  // empty -> default 25-point log grid
  bool truncation = true;
};

int auto_big_k_n(int n);

// Per-window ridge-stabilised least squares on raw truncated increments,
// integrated with weight K_n / n per window.  No standardization and no
// thresholding.  With a factor subset this is the restricted variant: the
// regression runs on those columns only and the rest are reported as zero.
IntegratedBetaEstimate akx_integrated_beta(const LogPricePanel& panel,
                                           const BaselineConfig& cfg);

// One global l1-penalised regression of response increments on regressor
// increments; the coefficient vector is read directly as the integrated
// estimate.  The penalty level is picked from the grid by
//   n log(RSS / n) + log(n) df.
struct LassoFit {
  IntegratedBetaEstimate ibeta;
  SelectionTable table;
};
LassoFit lasso_integrated_beta(const LogPricePanel& panel,
                               const BaselineConfig& cfg);

}  // namespace tedbeta
