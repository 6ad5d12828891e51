#include "tedbeta/sim.hpp"

#include <cmath>
#include <random>
#include <string>

#include "tedbeta/errors.hpp"
#include "tedbeta/rng.hpp"

namespace tedbeta {

namespace {

// Stream tags; every noise source owns an engine derived from (seed, tag).
enum StreamTag : std::uint64_t {
  kFactorNoise = 1,
  kResidualNoise = 2,
  kStateNoise = 3,
  kBetaNoise = 4,
  kFactorJumps = 5,
  kResponseJumps = 6,
};

double ou_step(double s, const OuParams& ou, double dt, double sdt,
               double shock) {
  return s + ou.rate * (ou.mean - s) * dt + ou.vol * sdt * shock;
}

}  // namespace

int DgpSpec::resolved_sp() const {
  if (s_p > 0) return s_p;
  return static_cast<int>(std::ceil(std::log(static_cast<double>(p))));
}

void DgpSpec::validate() const {
  if (p < 1) throw UsageError("dgp: p must be >= 1");
  if (n_all < 1) throw UsageError("dgp: n_all must be >= 1");
  const int sp = resolved_sp();
  if (sp < 0 || sp > p) throw UsageError("dgp: s_p must lie in [0, p]");
  if (!(std::abs(corr_decay) < 1.0))
    throw UsageError("dgp: corr_decay must satisfy |rho| < 1");
  if (jump_intensity_x < 0.0 || jump_intensity_y < 0.0 || jump_sd < 0.0)
    throw UsageError("dgp: jump parameters must be non-negative");
}

Eigen::MatrixXd ar1_cholesky(double xi, double rho, int p) {
  if (p < 1) throw UsageError("ar1_cholesky: p must be >= 1");
  if (!(std::abs(rho) < 1.0))
    throw UsageError("ar1_cholesky: need |rho| < 1");
  if (xi <= 0.0) throw UsageError("ar1_cholesky: variance must be > 0");
  // The AR(1) correlation matrix has the classic closed-form factor: first
  // column rho^i, later columns scaled by sqrt(1 - rho^2) and shifted.
  const double root = std::sqrt(xi);
  const double tail = std::sqrt(xi * (1.0 - rho * rho));
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(p, p);
  for (int i = 0; i < p; ++i) {
    l(i, 0) = root * std::pow(rho, i);
    for (int j = 1; j <= i; ++j) l(i, j) = tail * std::pow(rho, i - j);
  }
  return l;
}

SimOutput simulate_paths(const DgpSpec& spec, std::uint64_t seed) {
  spec.validate();
  const int p = spec.p;
  const int n = spec.n_all;
  const int sp = spec.resolved_sp();
  const double dt = 1.0 / n;
  const double sdt = std::sqrt(dt);

  auto factor_eng = make_engine(seed, kFactorNoise);
  auto resid_eng = make_engine(seed, kResidualNoise);
  auto state_eng = make_engine(seed, kStateNoise);
  auto beta_eng = make_engine(seed, kBetaNoise);
  auto jump_x_eng = make_engine(seed, kFactorJumps);
  auto jump_y_eng = make_engine(seed, kResponseJumps);
  // One distribution object per engine: normal_distribution caches a second
  // variate internally, so sharing one across engines would leak draws between
  // streams and break the pairing of variants that differ only in one source.
  std::normal_distribution<double> factor_norm(0.0, 1.0), resid_norm(0.0, 1.0),
      state_norm(0.0, 1.0), beta_norm(0.0, 1.0), jump_x_norm(0.0, 1.0),
      jump_y_norm(0.0, 1.0);
  std::uniform_real_distribution<double> jump_x_unif(0.0, 1.0),
      jump_y_unif(0.0, 1.0);

  // Unit-variance factor loading; the stochastic level enters as sqrt(xi_t).
  const Eigen::MatrixXd l_unit = ar1_cholesky(1.0, spec.corr_decay, p);

  double xi = spec.xi.init;
  double nu = spec.nu.init;
  double zeta = spec.zeta.init;
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  beta.head(sp).setConstant(spec.beta_init);

  SimOutput out;
  out.panel.times.resize(n + 1);
  out.panel.y.resize(n + 1);
  out.panel.x.resize(n + 1, p);
  out.true_beta_path.resize(n, p);
  out.true_integrated_beta = Eigen::VectorXd::Zero(p);

  out.panel.times[0] = 0.0;
  out.panel.y[0] = 0.0;
  out.panel.x.row(0).setZero();

  const double px = std::min(1.0, spec.jump_intensity_x * dt);
  const double py = std::min(1.0, spec.jump_intensity_y * dt);

  Eigen::VectorXd z(p), dxc(p);
  for (int i = 0; i < n; ++i) {
    out.true_beta_path.row(i) = beta.transpose();
    out.true_integrated_beta += beta * dt;

    for (int j = 0; j < p; ++j) z[j] = factor_norm(factor_eng);
    const double vol = std::sqrt(std::max(xi, 0.0));
    dxc.noalias() = l_unit * z;
    dxc *= vol * sdt;

    const double dzr = nu * sdt * resid_norm(resid_eng);
    const double dy_diffusion = beta.dot(dxc) + dzr;

    out.panel.x.row(i + 1) = out.panel.x.row(i) + dxc.transpose();
    double dy_jump = 0.0;
    for (int j = 0; j < p; ++j) {
      if (jump_x_unif(jump_x_eng) < px) {
        const double size = spec.jump_sd * jump_x_norm(jump_x_eng);
        out.panel.x(i + 1, j) += size;
        out.jumps.push_back(JumpEvent{i, j, size});
      }
    }
    if (jump_y_unif(jump_y_eng) < py) {
      const double size = spec.jump_sd * jump_y_norm(jump_y_eng);
      dy_jump = size;
      out.jumps.push_back(JumpEvent{i, -1, size});
    }
    out.panel.y[i + 1] = out.panel.y[i] + dy_diffusion + dy_jump;
    out.panel.times[i + 1] = static_cast<double>(i + 1) / n;

    // Advance beta with the left-endpoint zeta, then the latent states.
    if (spec.regime == BetaRegime::time_varying) {
      for (int j = 0; j < sp; ++j)
        beta[j] += spec.beta_drift * dt + zeta * sdt * beta_norm(beta_eng);
    }
    xi = ou_step(xi, spec.xi, dt, sdt, state_norm(state_eng));
    nu = ou_step(nu, spec.nu, dt, sdt, state_norm(state_eng));
    zeta = ou_step(zeta, spec.zeta, dt, sdt, state_norm(state_eng));
  }
  out.panel.times[n] = 1.0;
  return out;
}

LogPricePanel subsample_panel(const LogPricePanel& fine, int n) {
  const int n_fine = fine.n();
  if (n < 1 || n > n_fine)
    throw UsageError("subsample: n must lie in [1, n_all]");
  if (n_fine % n != 0)
    throw UsageError("subsample: n must divide n_all (" +
                     std::to_string(n_fine) + ")");
  const int stride = n_fine / n;
  LogPricePanel out;
  out.times.resize(n + 1);
  out.y.resize(n + 1);
  out.x.resize(n + 1, fine.p());
  for (int i = 0; i <= n; ++i) {
    out.times[i] = static_cast<double>(i) / n;
    out.y[i] = fine.y[i * stride];
    out.x.row(i) = fine.x.row(i * stride);
  }
  return out;
}

}  // namespace tedbeta
