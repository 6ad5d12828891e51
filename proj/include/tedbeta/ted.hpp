#pragma once

#include <Eigen/Dense>
#include <limits>
#include <string>
#include <vector>

#include "tedbeta/panel.hpp"
#include "tedbeta/tuning.hpp"
#include "tedbeta/windows.hpp"

namespace tedbeta {

// Per-window output, scattered back to the full coordinate set (inactive
// coordinates are zero).  *_std vectors live in the standardized units the
// solves run in; *_raw in original increment units.
struct WindowEstimate {
  Eigen::VectorXd dantzig_std, debiased_std;
  Eigen::VectorXd dantzig_raw, debiased_raw;
  Eigen::MatrixXd precision;  // standardized units
  double dantzig_gap = -std::numeric_limits<double>::infinity();
  double clime_gap = -std::numeric_limits<double>::infinity();
  bool degenerate = false;
};

struct InstantEstimates {
  std::vector<WindowEstimate> windows;
  int k_n = 0;
  // bounds as imposed on the correlation-form Gram (lambda_n here is the
  // rate value times k_n/n; tau_n is scale-invariant)
  double lambda_n = 0.0, tau_n = 0.0;
  // Worst independent constraint re-check over every solve of the run,
  // tuning sweeps included.
  double max_dantzig_gap = -std::numeric_limits<double>::infinity();
  double max_clime_gap = -std::numeric_limits<double>::infinity();
};

struct IntegratedBetaEstimate {
  Eigen::VectorXd raw;          // integrated debiased estimate
  Eigen::VectorXd thresholded;  // after the sparsification step
  double h_n = 0.0;
  ThresholdRule rule = ThresholdRule::hard;
  std::string method;
};

struct ResolvedTuning {
  double c_lambda = 0.0, c_tau = 0.0, c_h = 0.0;
  double lambda_n = 0.0, tau_n = 0.0, h_n = 0.0;  // rate-formula values
  int k_n = 0;
};

struct TedFit {
  IntegratedBetaEstimate ibeta;
  InstantEstimates instants;
  ResolvedTuning resolved;
  SelectionTable lambda_table, tau_table;  // empty when the constant was fixed
};

// Window-level operations (standardized units, full-width in/out).
Eigen::VectorXd instant_beta(const WindowGram& g, double lambda_n);
Eigen::MatrixXd instant_precision(const WindowGram& g, double tau_n);

// One-step bias correction: beta + omega' (bvec - a beta).  Identical to the
// residual form (1/k) omega' Xs'(Ys - Xs beta) by the normal-equation algebra.
Eigen::VectorXd debias(const WindowGram& g, const Eigen::VectorXd& beta_std,
                       const Eigen::MatrixXd& omega_std);

// Undoes the per-window standardization: beta_j * sd_y / sd_j on active
// coordinates, zero elsewhere.
Eigen::VectorXd unstandardize(const WindowGram& g,
                              const Eigen::VectorXd& beta_std);

// Riemann sum of per-window estimates with weight k_n / n each.
Eigen::VectorXd integrate(const std::vector<Eigen::VectorXd>& window_betas,
                          int k_n, int n);

Eigen::VectorXd threshold(const Eigen::VectorXd& raw, double h_n,
                          ThresholdRule rule);

// Full pipeline: truncate, window, standardize, per-window selector solve and
// precision estimate, debias, rescale, integrate, threshold.  Constants with
// grids are tuned on this panel; c_h must be fixed (its selector needs
// multiple periods -- see select_c_h_mspe).
TedFit ted_pipeline(const LogPricePanel& panel, const TuningConfig& cfg);
TedFit ted_pipeline(const PreparedPanel& prep, const TuningConfig& cfg);

}  // namespace tedbeta
