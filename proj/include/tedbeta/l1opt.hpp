#pragma once

#include <Eigen/Dense>
#include <vector>

namespace tedbeta {

enum class SolveStatus { optimal, infeasible, numerical_failure };

// min ||beta||_1  subject to  ||A beta - b||_max <= lambda,  A of shape m x p.
struct L1LinfProblem {
  Eigen::MatrixXd a;
  Eigen::VectorXd b;
  double lambda = 0.0;
  double tol = 1e-8;  // slack allowed when re-verifying the constraint
};

struct L1Solution {
  Eigen::VectorXd beta;
  double objective = 0.0;
  // max_i |(A beta - b)_i| - lambda; <= tol for an accepted optimum.
  double feasibility_gap = 0.0;
  SolveStatus status = SolveStatus::numerical_failure;
  int iterations = 0;
};

// Dual simplex solver for the problem above, written against the equivalent
// bounded-variable LP
//
//   min sum(z) + sum(w)   s.t.  A z - A w + s = b + lambda,
//                               z, w >= 0,  0 <= s <= 2 lambda.
//
// The all-slack basis is dual feasible from the start (reduced costs are
// 1, 1, 0), so the method runs straight toward primal feasibility with no
// phase-1.  Changing lambda moves only the bounds, never the reduced costs,
// which makes re-solves along a decreasing grid warm starts: the previous
// basis stays dual feasible and typically needs a handful of pivots.
//
// Pivot selection is deterministic (largest violation, ties to the smallest
// variable index; after an iteration budget it falls back to smallest-index
// selection, the classic anti-cycling rule), so identical inputs produce
// identical solutions on every run.
class LinfL1Solver {
 public:
  // Keeps a reference to `a`; the caller must keep it alive.
  explicit LinfL1Solver(const Eigen::MatrixXd& a);

  // Resets the solver for a fresh target (cold start on next solve()).
  void set_target(const Eigen::VectorXd& b);

  // Solves at the given lambda, reusing the previous basis when one exists.
  L1Solution solve(double lambda, double tol = 1e-8);

 private:
  enum class VarState : unsigned char { basic, lower, upper };

  int slack_row(int var) const { return var - 2 * p_; }
  bool is_slack(int var) const { return var >= 2 * p_; }
  double var_value(int var) const;
  void cold_start();
  void compute_xb();
  void refactor();
  L1Solution finish(SolveStatus status, int iters, double tol) const;

  const Eigen::MatrixXd& a_;
  int m_ = 0, p_ = 0, nvar_ = 0;
  Eigen::VectorXd b_;
  double lambda_ = 0.0;
  bool have_basis_ = false;

  std::vector<int> basis_;       // variable occupying each row
  std::vector<VarState> state_;  // per variable
  Eigen::MatrixXd binv_;         // explicit basis inverse
  Eigen::VectorXd xb_;           // basic variable values
  Eigen::VectorXd dual_;         // reduced costs (meaningful for nonbasic)

  // scratch, preallocated once
  Eigen::VectorXd rho_, trow_, acol_;
};

L1Solution solve_l1_linf(const L1LinfProblem& prob);

// Column-wise precision estimation: column j solves
//   min ||omega||_1  s.t.  ||ahat omega - e_j||_max <= tau.
// No symmetrisation is applied afterwards.
struct ClimeResult {
  Eigen::MatrixXd omega;
  std::vector<SolveStatus> column_status;
  double max_gap = 0.0;
  bool ok() const;
};

ClimeResult solve_clime_detailed(const Eigen::MatrixXd& ahat, double tau,
                                 double tol = 1e-8);

// Throws NumericalError naming the first failing column.
Eigen::MatrixXd solve_clime(const Eigen::MatrixXd& ahat, double tau);

// Cyclic coordinate descent for min ||y - x beta||^2 + lambda ||beta||_1
// (residual sum of squares unnormalised).  Gram form for reuse across a grid.
Eigen::VectorXd lasso_cd(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                         double lambda);
Eigen::VectorXd lasso_cd_gram(const Eigen::MatrixXd& gram,
                              const Eigen::VectorXd& q, double lambda,
                              Eigen::VectorXd warm = Eigen::VectorXd());

}  // namespace tedbeta
