#pragma once

#include <Eigen/Dense>
#include <vector>

#include "tedbeta/panel.hpp"

namespace tedbeta {

// Column scales recorded while standardizing one window, needed to map
// coefficient estimates back to the original increment units.
struct ScaleRecord {
  Eigen::VectorXd x_mean, x_sd;
  double y_mean = 0.0, y_sd = 0.0;
  std::vector<std::uint8_t> active;  // 0 marks a zero-variance column
  bool y_ok = true;
};

struct StandardizedWindow {
  Eigen::MatrixXd x;  // k x p; zero-variance columns left at zero
  Eigen::VectorXd y;  // k
  ScaleRecord scales;
};

// Per-window sufficient statistics for all downstream solves, restricted to
// the active columns:  a = Xs'Xs / k  (a correlation matrix up to rounding),
// bvec = Xs'Ys / k.  `cols` maps active position -> original coordinate.
struct WindowGram {
  Eigen::MatrixXd a;
  Eigen::VectorXd bvec;
  std::vector<int> cols;
  ScaleRecord scales;
  int k = 0;
  int p_full = 0;
  bool degenerate = false;  // response had zero variance in this window
};

// (pi / 2) * sum_{i >= 1} |d_{i-1}| |d_i|; robust to isolated jumps, so it
// estimates the continuous part of the quadratic variation.
double bipower_variation(const Eigen::VectorXd& d);

// Cutoffs 3 * n^{-0.47} * sqrt(bipower variation), one for the response and
// one per regressor column, computed from the full (untruncated) panel.
TruncationLevels truncation_levels(const IncrementMatrix& incr);

// Zeroes every increment whose magnitude exceeds its cutoff.  Applying this
// twice is a usage error.
IncrementMatrix truncate(const IncrementMatrix& incr,
                         const TruncationLevels& levels);

// Centers and scales each column (and the response) to mean 0, variance 1,
// using the 1/k population divisor.  Zero-variance columns are flagged.
StandardizedWindow standardize_window(const WindowView& w);

WindowGram window_gram(const StandardizedWindow& sw);
WindowGram window_gram(const WindowView& w);

struct PreparedPanel {
  IncrementMatrix incr;  // post-truncation when enabled
  std::vector<WindowGram> grams;
  int k_n = 0;
  int n = 0;
  int p = 0;
  double delta_n = 0.0;
  bool truncated = false;
};

// increments -> (optional) truncation -> windows -> grams.  k_n == 0 selects
// floor(sqrt(n)).
PreparedPanel prepare_panel(const LogPricePanel& panel, int k_n,
                            bool truncation);

int auto_k_n(int n);

}  // namespace tedbeta
