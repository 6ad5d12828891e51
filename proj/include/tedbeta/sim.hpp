#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "tedbeta/panel.hpp"

namespace tedbeta {

// Mean-reverting (Ornstein-Uhlenbeck) scalar state:
//   dS = rate * (mean - S) dt + vol dW,  S_0 = init.
struct OuParams {
  double rate = 0.0;
  double mean = 0.0;
  double vol = 0.0;
  double init = 0.0;
};

enum class BetaRegime { time_varying, constant };

// Synthetic market generator: p correlated continuous factors with AR(1)
// cross-sectional correlation and a stochastic common variance level xi_t,
// a response following the factors through a sparse, possibly time-varying
// coefficient vector, an idiosyncratic diffusion with stochastic volatility
// nu_t, and compound-Poisson jumps in both the factors and the response.
struct DgpSpec {
  int p = 100;
  int s_p = 0;     // active coordinate count; 0 means ceil(log p)
  int n_all = 4000;
  BetaRegime regime = BetaRegime::time_varying;

  OuParams nu{3.0, 0.12, 0.03, 0.15};    // response residual volatility
  OuParams xi{5.0, 0.30, 0.12, 0.50};    // factor variance level
  OuParams zeta{3.0, 0.50, 0.20, 0.40};  // coefficient volatility

  double corr_decay = 0.8;   // cross-sectional AR(1) parameter
  double beta_drift = 0.05;  // drift of each active coefficient
  double beta_init = 1.0;    // active coefficients at t = 0

  double jump_intensity_x = 20.0;  // per factor coordinate, per unit time
  double jump_intensity_y = 15.0;
  double jump_sd = 0.05;

  int resolved_sp() const;
  void validate() const;
};

// One jump added to the path at the given Euler step; coord == -1 marks the
// response, otherwise the factor coordinate.
struct JumpEvent {
  int step = 0;
  int coord = 0;
  double size = 0.0;
};

struct SimOutput {
  LogPricePanel panel;                  // full n_all grid
  Eigen::VectorXd true_integrated_beta;  // integral of beta_t over [0, 1]
  Eigen::MatrixXd true_beta_path;        // n_all x p, left endpoints
  std::vector<JumpEvent> jumps;
};

// Lower Cholesky factor of xi * (corr_decay^|i-j|), in closed form.
Eigen::MatrixXd ar1_cholesky(double xi, double rho, int p);

// Euler scheme on the n_all grid.  Independent noise sources draw from
// separate derived streams, so e.g. switching jumps off does not disturb the
// diffusion path produced by the same seed.
SimOutput simulate_paths(const DgpSpec& spec, std::uint64_t seed);

// Keeps every (fine.n() / n)-th grid point; n must divide fine.n().
LogPricePanel subsample_panel(const LogPricePanel& fine, int n);

}  // namespace tedbeta
