#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tedbeta/baselines.hpp"
#include "tedbeta/sim.hpp"
#include "tedbeta/ted.hpp"
#include "tedbeta/tuning.hpp"

namespace tedbeta {

struct ErrorNorms {
  double max_err = 0.0;
  double l1 = 0.0;
  double l2 = 0.0;
};

// Coordinatewise max / sum / Euclidean norm of est - truth.
ErrorNorms error_norms(const Eigen::VectorXd& est, const Eigen::VectorXd& truth);

// 1 - RSS / TSS on (optionally truncated) increments, with the integrated
// coefficient vector standing in for the instantaneous one.  In-sample and
// out-of-sample differ only in where `ibeta` came from (this panel or an
// earlier one), so both share this function.  Returns nullopt when the total
// sum of squares vanishes.
std::optional<double> r_squared(const LogPricePanel& panel,
                                const Eigen::VectorXd& ibeta,
                                bool truncation = true);

enum class Method { ted, lasso, akx, akx_six };

std::string method_name(Method m);
std::optional<Method> parse_method(const std::string& name);

// One Monte Carlo comparison grid.  Every rep simulates a single fine panel
// per regime draw and subsamples it to each n, so methods and sample sizes
// are compared on nested versions of the same path.
struct BenchmarkSpec {
  std::vector<int> n_values;        // each must divide dgp.n_all
  std::vector<BetaRegime> regimes;
  std::vector<Method> methods;
  int reps = 100;
  DgpSpec dgp;                      // regime field is overridden per cell
  TuningConfig tuning;              // c_h must be fixed
  BaselineConfig baseline;          // factor_subset defaults to first 6 cols
  std::uint64_t seed = 12345;
  int jobs = 0;                     // 0 -> all cores
};

// Everything produced by one rep, kept for audit and for the finer-grained
// checks (debiasing benefit, support recovery, constraint re-checks).
struct RepDetail {
  Eigen::VectorXd truth;
  // est[n_idx][method_idx], aligned with spec.n_values / spec.methods.
  std::vector<std::vector<IntegratedBetaEstimate>> est;
  // Extras recorded when the thresholded-debiased method ran at that n:
  // the integrated selector-only estimate (no bias correction) and the worst
  // constraint re-check gaps across every solve of the fit.
  std::vector<Eigen::VectorXd> ted_selector_integral;  // [n_idx]
  std::vector<double> ted_dantzig_gap, ted_clime_gap;  // [n_idx]
  bool ok = true;
  std::string error;
};

RepDetail run_benchmark_rep(const BenchmarkSpec& spec, BetaRegime regime,
                            std::uint64_t rep_seed);

// Deterministic seed chain: regime stream from the base seed and the regime
// tag, rep seeds from the regime stream.  Cells for one regime are identical
// no matter which other regimes run alongside.
std::uint64_t regime_stream_seed(std::uint64_t base_seed, BetaRegime regime);
std::uint64_t rep_seed(std::uint64_t regime_stream, int rep);

struct CellStats {
  Method method = Method::ted;
  BetaRegime regime = BetaRegime::time_varying;
  int n = 0;
  int reps = 0;      // successful reps entering the means
  int failures = 0;
  double mean_max = 0.0, se_max = 0.0;
  double mean_l1 = 0.0, se_l1 = 0.0;
  double mean_l2 = 0.0, se_l2 = 0.0;
  std::vector<ErrorNorms> per_rep;  // audit trail behind the means
};

struct BenchmarkReport {
  std::vector<CellStats> cells;
  std::uint64_t seed = 0;
};

BenchmarkReport run_benchmark(const BenchmarkSpec& spec);

// Aggregation used by run_benchmark, exposed for tests: sample mean and
// standard error (sd / sqrt(reps), zero for a single rep).
void mean_and_se(const std::vector<double>& xs, double& mean, double& se);

// Flat serialization of a report: one row per (cell, norm).
struct ReportRow {
  std::string method, regime, norm;
  int n = 0;
  double mean = 0.0, stderr_of_mean = 0.0;
  int reps = 0;
};

std::vector<ReportRow> report_rows(const BenchmarkReport& rep);
void write_report_csv(const std::string& path,
                      const std::vector<ReportRow>& rows);
std::vector<ReportRow> read_report_csv(const std::string& path);

// Plot-ready long format: regime,norm,method,n,mean,log10_mean with rows
// grouped by (regime, norm, method) and n ascending inside each group.
void write_long_report_csv(const std::string& path,
                           const std::vector<ReportRow>& rows);

std::string regime_name(BetaRegime r);
std::optional<BetaRegime> parse_regime(const std::string& name);

}  // namespace tedbeta
