#include "tedbeta/l1opt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "tedbeta/errors.hpp"

namespace tedbeta {

namespace {

constexpr double kPivotTol = 1e-11;   // smallest usable pivot magnitude
constexpr double kFeasTol = 1e-9;     // bound violation considered real
constexpr double kDualTol = 1e-9;     // reduced-cost noise floor
constexpr int kRefactorEvery = 64;

double soft_threshold(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

}  // namespace

LinfL1Solver::LinfL1Solver(const Eigen::MatrixXd& a) : a_(a) {
  m_ = static_cast<int>(a.rows());
  p_ = static_cast<int>(a.cols());
  if (m_ < 1 || p_ < 1) throw UsageError("constraint matrix must be nonempty");
  if (!a.allFinite()) throw UsageError("constraint matrix has non-finite entries");
  nvar_ = 2 * p_ + m_;
  rho_.resize(m_);
  trow_.resize(p_);
  acol_.resize(m_);
}

void LinfL1Solver::set_target(const Eigen::VectorXd& b) {
  if (b.size() != m_) throw UsageError("target length must match row count");
  if (!b.allFinite()) throw UsageError("target has non-finite entries");
  b_ = b;
  have_basis_ = false;
}

double LinfL1Solver::var_value(int var) const {
  switch (state_[var]) {
    case VarState::basic: {
      for (int i = 0; i < m_; ++i)
        if (basis_[i] == var) return xb_[i];
      return 0.0;
    }
    case VarState::upper:
      return 2.0 * lambda_;  // only slacks have a finite upper bound
    case VarState::lower:
    default:
      return 0.0;
  }
}

void LinfL1Solver::cold_start() {
  basis_.assign(m_, 0);
  state_.assign(nvar_, VarState::lower);
  for (int i = 0; i < m_; ++i) {
    basis_[i] = 2 * p_ + i;
    state_[2 * p_ + i] = VarState::basic;
  }
  binv_ = Eigen::MatrixXd::Identity(m_, m_);
  dual_.resize(nvar_);
  dual_.head(2 * p_).setOnes();
  dual_.tail(m_).setZero();
  compute_xb();
  have_basis_ = true;
}

// xb = Binv (rhs - sum over nonbasic-at-upper columns of their bound value).
// Only slacks have finite upper bounds, so the sum touches unit columns.
void LinfL1Solver::compute_xb() {
  Eigen::VectorXd r = b_.array() + lambda_;
  for (int i = 0; i < m_; ++i) {
    const int var = 2 * p_ + i;
    if (state_[var] == VarState::upper) r[i] -= 2.0 * lambda_;
  }
  xb_.noalias() = binv_ * r;
}

void LinfL1Solver::refactor() {
  Eigen::MatrixXd bmat(m_, m_);
  for (int i = 0; i < m_; ++i) {
    const int var = basis_[i];
    if (!is_slack(var)) {
      if (var < p_)
        bmat.col(i) = a_.col(var);
      else
        bmat.col(i) = -a_.col(var - p_);
    } else {
      bmat.col(i) = Eigen::VectorXd::Unit(m_, slack_row(var));
    }
  }
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(bmat);
  binv_ = lu.inverse();
  compute_xb();

  // Rebuild reduced costs from scratch: d = c - y'A with y = Binv' c_B.
  Eigen::VectorXd cb = Eigen::VectorXd::Zero(m_);
  for (int i = 0; i < m_; ++i)
    if (!is_slack(basis_[i])) cb[i] = 1.0;
  Eigen::VectorXd y = binv_.transpose() * cb;
  Eigen::VectorXd t = a_.transpose() * y;
  for (int j = 0; j < p_; ++j) {
    dual_[j] = 1.0 - t[j];
    dual_[p_ + j] = 1.0 + t[j];
  }
  for (int i = 0; i < m_; ++i) dual_[2 * p_ + i] = -y[i];
  for (int i = 0; i < m_; ++i) dual_[basis_[i]] = 0.0;
}

L1Solution LinfL1Solver::finish(SolveStatus status, int iters,
                                double tol) const {
  L1Solution out;
  out.status = status;
  out.iterations = iters;
  out.beta = Eigen::VectorXd::Zero(p_);
  if (status == SolveStatus::optimal) {
    for (int i = 0; i < m_; ++i) {
      const int var = basis_[i];
      if (var < p_)
        out.beta[var] += xb_[i];
      else if (var < 2 * p_)
        out.beta[var - p_] -= xb_[i];
    }
    out.objective = out.beta.lpNorm<1>();
    out.feasibility_gap =
        (a_ * out.beta - b_).lpNorm<Eigen::Infinity>() - lambda_;
    if (!(out.feasibility_gap <= tol)) {
      out.status = SolveStatus::numerical_failure;
    }
  } else {
    out.beta.setZero();
    out.objective = std::numeric_limits<double>::quiet_NaN();
    out.feasibility_gap = std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

L1Solution LinfL1Solver::solve(double lambda, double tol) {
  if (b_.size() != m_) throw UsageError("solver target not set");
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw UsageError("lambda must be finite and >= 0");

  lambda_ = lambda;
  if (!have_basis_) {
    cold_start();
  } else {
    compute_xb();  // bounds moved; basis and reduced costs carry over
  }

  const int max_iter = 1000 + 60 * (m_ + 2 * p_);
  const int bland_after = 400 + 20 * (m_ + 2 * p_);
  int since_refactor = 0;
  int infeasible_checks = 0;

  for (int iter = 1; iter <= max_iter; ++iter) {
    // --- leaving variable: a basic variable outside its bounds ---
    int row = -1;
    double worst = kFeasTol;
    const bool bland = iter > bland_after;
    for (int i = 0; i < m_; ++i) {
      const int var = basis_[i];
      double viol = -xb_[i];  // below the common lower bound 0
      if (is_slack(var)) viol = std::max(viol, xb_[i] - 2.0 * lambda_);
      if (viol <= kFeasTol) continue;
      if (bland) {
        if (row == -1 || var < basis_[row]) row = i;
      } else if (viol > worst ||
                 (row >= 0 && viol == worst && var < basis_[row])) {
        worst = viol;
        row = i;
      }
    }
    if (row == -1) {
      if (since_refactor > 0) {
        refactor();  // confirm optimality against a fresh factorisation
        since_refactor = 0;
        continue;
      }
      return finish(SolveStatus::optimal, iter - 1, tol);
    }

    const int leave_var = basis_[row];
    const bool leave_above =
        is_slack(leave_var) && xb_[row] > 2.0 * lambda_ + kFeasTol;
    const double target = leave_above ? 2.0 * lambda_ : 0.0;
    const double delta = xb_[row] - target;  // sign tells the direction

    rho_ = binv_.row(row).transpose();
    trow_.noalias() = a_.transpose() * rho_;

    // --- entering variable: dual ratio test over the nonbasic columns ---
    const bool fixed_slacks = lambda_ <= 0.0;
    int enter = -1;
    double best_ratio = std::numeric_limits<double>::infinity();
    double enter_alpha = 0.0;
    auto consider = [&](int var, double alpha) {
      if (state_[var] == VarState::basic) return;
      if (is_slack(var) && fixed_slacks) return;  // fixed at 0, cannot move
      if (std::abs(alpha) <= kPivotTol) return;
      const bool at_lower = state_[var] == VarState::lower;
      bool eligible;
      if (delta < 0.0)  // leaving from below: its value must increase
        eligible = at_lower ? (alpha < 0.0) : (alpha > 0.0);
      else
        eligible = at_lower ? (alpha > 0.0) : (alpha < 0.0);
      if (!eligible) return;
      const double d = at_lower ? std::max(dual_[var], 0.0)
                                : -std::min(dual_[var], 0.0);
      const double ratio = d / std::abs(alpha);
      if (ratio < best_ratio - kDualTol ||
          (ratio < best_ratio + kDualTol && (enter == -1 || var < enter))) {
        best_ratio = ratio;
        enter = var;
        enter_alpha = alpha;
      }
    };
    for (int j = 0; j < p_; ++j) consider(j, trow_[j]);
    for (int j = 0; j < p_; ++j) consider(p_ + j, -trow_[j]);
    for (int i = 0; i < m_; ++i) consider(2 * p_ + i, rho_[i]);

    if (enter == -1) {
      // No direction can repair this row: primal infeasible -- unless the
      // basis has drifted.  Verify once on a fresh factorisation.
      if (infeasible_checks++ == 0 && since_refactor > 0) {
        refactor();
        since_refactor = 0;
        continue;
      }
      return finish(SolveStatus::infeasible, iter, tol);
    }

    // Full entering column in the current basis.
    if (enter < p_)
      acol_.noalias() = binv_ * a_.col(enter);
    else if (enter < 2 * p_)
      acol_.noalias() = -(binv_ * a_.col(enter - p_));
    else
      acol_ = binv_.col(slack_row(enter));
    const double pivot = acol_[row];
    if (std::abs(pivot) < kPivotTol ||
        std::abs(pivot - enter_alpha) > 1e-7 * std::max(1.0, std::abs(pivot))) {
      refactor();  // row/column products disagree: factorisation is stale
      since_refactor = 0;
      continue;
    }

    const double step = delta / pivot;
    const double gamma = dual_[enter] / enter_alpha;

    xb_ -= step * acol_;
    xb_[row] = (state_[enter] == VarState::upper ? 2.0 * lambda_ : 0.0) + step;

    // Reduced costs: d_k -= gamma * alpha_k over nonbasic k.
    if (gamma != 0.0) {
      for (int j = 0; j < p_; ++j) {
        if (state_[j] != VarState::basic) dual_[j] -= gamma * trow_[j];
        if (state_[p_ + j] != VarState::basic)
          dual_[p_ + j] += gamma * trow_[j];
      }
      for (int i = 0; i < m_; ++i) {
        const int var = 2 * p_ + i;
        if (state_[var] != VarState::basic) dual_[var] -= gamma * rho_[i];
      }
    }
    dual_[leave_var] = -gamma;
    dual_[enter] = 0.0;

    state_[leave_var] = leave_above ? VarState::upper : VarState::lower;
    state_[enter] = VarState::basic;
    basis_[row] = enter;

    // Product-form update of the explicit inverse.
    binv_.row(row) /= pivot;
    for (int i = 0; i < m_; ++i) {
      if (i == row) continue;
      const double f = acol_[i];
      if (f != 0.0) binv_.row(i) -= f * binv_.row(row);
    }

    if (++since_refactor >= kRefactorEvery) {
      refactor();
      since_refactor = 0;
    }
  }
  return finish(SolveStatus::numerical_failure, max_iter, tol);
}

L1Solution solve_l1_linf(const L1LinfProblem& prob) {
  LinfL1Solver solver(prob.a);
  solver.set_target(prob.b);
  return solver.solve(prob.lambda, prob.tol);
}

bool ClimeResult::ok() const {
  for (auto s : column_status)
    if (s != SolveStatus::optimal) return false;
  return true;
}

ClimeResult solve_clime_detailed(const Eigen::MatrixXd& ahat, double tau,
                                 double tol) {
  if (ahat.rows() != ahat.cols())
    throw UsageError("precision target matrix must be square");
  const int p = static_cast<int>(ahat.rows());
  ClimeResult out;
  out.omega = Eigen::MatrixXd::Zero(p, p);
  out.column_status.assign(p, SolveStatus::numerical_failure);
  LinfL1Solver solver(ahat);
  for (int j = 0; j < p; ++j) {
    solver.set_target(Eigen::VectorXd::Unit(p, j));
    const L1Solution sol = solver.solve(tau, tol);
    out.column_status[j] = sol.status;
    if (sol.status == SolveStatus::optimal) {
      out.omega.col(j) = sol.beta;
      out.max_gap = std::max(out.max_gap, sol.feasibility_gap);
    }
  }
  return out;
}

Eigen::MatrixXd solve_clime(const Eigen::MatrixXd& ahat, double tau) {
  ClimeResult res = solve_clime_detailed(ahat, tau);
  for (size_t j = 0; j < res.column_status.size(); ++j) {
    if (res.column_status[j] == SolveStatus::infeasible)
      throw NumericalError("precision column " + std::to_string(j) +
                           " infeasible at tau=" + std::to_string(tau));
    if (res.column_status[j] == SolveStatus::numerical_failure)
      throw NumericalError("precision column " + std::to_string(j) +
                           " failed numerically at tau=" + std::to_string(tau));
  }
  return res.omega;
}

Eigen::VectorXd lasso_cd_gram(const Eigen::MatrixXd& gram,
                              const Eigen::VectorXd& q, double lambda,
                              Eigen::VectorXd warm) {
  const int p = static_cast<int>(gram.rows());
  if (gram.cols() != p || q.size() != p)
    throw UsageError("gram/target shapes disagree");
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw UsageError("lambda must be finite and >= 0");

  Eigen::VectorXd beta =
      (warm.size() == p) ? std::move(warm) : Eigen::VectorXd::Zero(p);
  Eigen::VectorXd gb = gram * beta;  // maintained incrementally

  const double half = 0.5 * lambda;
  const int max_sweeps = 200000;
  const double update_tol = 1e-10;
  const double kkt_tol = 1e-8;

  auto kkt_violation = [&]() {
    // gradient of the RSS term is -2 (q - G beta)
    double v = 0.0;
    for (int j = 0; j < p; ++j) {
      const double g = 2.0 * (q[j] - gb[j]);
      if (beta[j] > 0.0)
        v = std::max(v, std::abs(g - lambda));
      else if (beta[j] < 0.0)
        v = std::max(v, std::abs(g + lambda));
      else
        v = std::max(v, std::abs(g) - lambda);
    }
    return v;
  };

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double max_update = 0.0;
    for (int j = 0; j < p; ++j) {
      const double gjj = gram(j, j);
      double next = 0.0;
      if (gjj > 1e-300) {
        const double r = q[j] - gb[j] + gjj * beta[j];
        next = soft_threshold(r, half) / gjj;
      }
      const double diff = next - beta[j];
      if (diff != 0.0) {
        gb.noalias() += diff * gram.col(j);
        beta[j] = next;
        max_update = std::max(max_update, std::abs(diff));
      }
    }
    if (max_update < update_tol || (sweep % 16 == 15 && kkt_violation() < kkt_tol)) {
      if (kkt_violation() <= 1e-6) return beta;
      if (max_update == 0.0)
        throw NumericalError("lasso stalled without certifying optimality");
    }
  }
  throw NumericalError("lasso exceeded the sweep budget");
}

Eigen::VectorXd lasso_cd(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                         double lambda) {
  if (x.rows() != y.size()) throw UsageError("design/response rows disagree");
  if (!x.allFinite() || !y.allFinite())
    throw UsageError("lasso inputs must be finite");
  const Eigen::MatrixXd gram = x.transpose() * x;
  const Eigen::VectorXd q = x.transpose() * y;
  return lasso_cd_gram(gram, q, lambda);
}

}  // namespace tedbeta
