#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

namespace tedbeta {

// Tolerance for checks on the observation time grid (uniform spacing, span).
inline constexpr double kGridTol = 1e-12;

// Per-coordinate jump-truncation cutoffs.  An increment is zeroed when its
// magnitude exceeds the cutoff; `u_y` guards the response, `u_x[j]` regressor
// column j.  The bipower variations they were derived from are kept for
// diagnostics.
struct TruncationLevels {
  double u_y = 0.0;
  Eigen::VectorXd u_x;
  double bv_y = 0.0;
  Eigen::VectorXd bv_x;
};

// Observed log-price panel on a uniform grid over [0, 1]: n + 1 time stamps,
// one response path Y and p regressor paths X.
struct LogPricePanel {
  Eigen::VectorXd times;  // (n + 1)
  Eigen::VectorXd y;      // (n + 1)
  Eigen::MatrixXd x;      // (n + 1) x p

  int n() const { return static_cast<int>(times.size()) - 1; }
  int p() const { return static_cast<int>(x.cols()); }

  // Throws DataError unless sizes agree, all values are finite, and the grid
  // is uniform with times[0] = 0 and times[n] = 1 (within kGridTol).
  void validate() const;
};

// First differences of a panel.  `truncated` records whether jump truncation
// has been applied (and with which levels); re-truncating is an error.
struct IncrementMatrix {
  Eigen::VectorXd dy;  // n
  Eigen::MatrixXd dx;  // n x p
  bool truncated = false;
  std::optional<TruncationLevels> levels;

  int n() const { return static_cast<int>(dy.size()); }
  int p() const { return static_cast<int>(dx.cols()); }
};

// Half-open row range [start, start + len) into an IncrementMatrix.  Views do
// not own data; the source must outlive them.
struct WindowView {
  const IncrementMatrix* src = nullptr;
  int start = 0;
  int len = 0;

  auto yv() const { return src->dy.segment(start, len); }
  auto xv() const { return src->dx.middleRows(start, len); }
};

// Differences consecutive rows; requires a validated panel.
IncrementMatrix increments(const LogPricePanel& panel);

// Partitions the n increments into floor(n / k_n) non-overlapping windows of
// exactly k_n rows each; the remainder at the end is dropped.  k_n must be in
// [1, n].
std::vector<WindowView> window_blocks(const IncrementMatrix& incr, int k_n);

}  // namespace tedbeta
