#include "tedbeta/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "tedbeta/csv.hpp"
#include "tedbeta/errors.hpp"
#include "tedbeta/parallel.hpp"
#include "tedbeta/rng.hpp"
#include "tedbeta/windows.hpp"

namespace tedbeta {

ErrorNorms error_norms(const Eigen::VectorXd& est,
                       const Eigen::VectorXd& truth) {
  if (est.size() != truth.size())
    throw UsageError("error_norms: length mismatch (" +
                     std::to_string(est.size()) + " vs " +
                     std::to_string(truth.size()) + ")");
  const Eigen::VectorXd d = est - truth;
  ErrorNorms out;
  out.max_err = d.size() == 0 ? 0.0 : d.cwiseAbs().maxCoeff();
  out.l1 = d.lpNorm<1>();
  out.l2 = d.norm();
  return out;
}

std::optional<double> r_squared(const LogPricePanel& panel,
                                const Eigen::VectorXd& ibeta,
                                bool truncation) {
  panel.validate();
  if (ibeta.size() != panel.p())
    throw UsageError("r_squared: coefficient length does not match panel");
  IncrementMatrix incr = increments(panel);
  if (truncation) incr = truncate(incr, truncation_levels(incr));
  const Eigen::VectorXd resid = incr.dy - incr.dx * ibeta;
  const double rss = resid.squaredNorm();
  const double mean_dy = incr.dy.mean();
  const double tss = (incr.dy.array() - mean_dy).matrix().squaredNorm();
  if (!(tss > 0.0)) return std::nullopt;
  return 1.0 - rss / tss;
}

std::string method_name(Method m) {
  switch (m) {
    case Method::ted: return "ted";
    case Method::lasso: return "lasso";
    case Method::akx: return "akx";
    case Method::akx_six: return "akx-six";
  }
  throw UsageError("unknown method enum value");
}

std::optional<Method> parse_method(const std::string& name) {
  if (name == "ted") return Method::ted;
  if (name == "lasso") return Method::lasso;
  if (name == "akx") return Method::akx;
  if (name == "akx-six" || name == "akx_six") return Method::akx_six;
  return std::nullopt;
}

std::string regime_name(BetaRegime r) {
  return r == BetaRegime::time_varying ? "time-varying" : "constant";
}

std::optional<BetaRegime> parse_regime(const std::string& name) {
  if (name == "time-varying" || name == "tv") return BetaRegime::time_varying;
  if (name == "constant" || name == "const") return BetaRegime::constant;
  return std::nullopt;
}

std::uint64_t regime_stream_seed(std::uint64_t base_seed, BetaRegime regime) {
  return derive_seed(base_seed, 1000 + static_cast<std::uint64_t>(regime));
}

std::uint64_t rep_seed(std::uint64_t regime_stream, int rep) {
  return derive_seed(regime_stream, static_cast<std::uint64_t>(rep));
}

namespace {

void validate_benchmark_spec(const BenchmarkSpec& spec) {
  if (spec.n_values.empty()) throw UsageError("benchmark: no sample sizes");
  if (spec.regimes.empty()) throw UsageError("benchmark: no regimes");
  if (spec.methods.empty()) throw UsageError("benchmark: no methods");
  if (spec.reps < 1) throw UsageError("benchmark: reps must be >= 1");
  spec.dgp.validate();
  for (int n : spec.n_values) {
    if (n < 2 || n > spec.dgp.n_all || spec.dgp.n_all % n != 0)
      throw UsageError(
          "benchmark: every sample size must divide the fine grid length");
  }
  const bool has_ted =
      std::find(spec.methods.begin(), spec.methods.end(), Method::ted) !=
      spec.methods.end();
  if (has_ted && !spec.tuning.c_h.fixed)
    throw UsageError("benchmark: c_h must be fixed (its selector needs "
                     "multiple periods)");
}

BaselineConfig baseline_config_for(const BenchmarkSpec& spec, Method m,
                                   int p) {
  BaselineConfig cfg = spec.baseline;
  if (m == Method::akx_six) {
    if (!cfg.factor_subset) {
      std::vector<int> first(std::min(6, p));
      std::iota(first.begin(), first.end(), 0);
      cfg.factor_subset = std::move(first);
    }
  } else {
    cfg.factor_subset.reset();
  }
  return cfg;
}

}  // namespace

RepDetail run_benchmark_rep(const BenchmarkSpec& spec, BetaRegime regime,
                            std::uint64_t seed) {
  DgpSpec dgp = spec.dgp;
  dgp.regime = regime;
  const int num_n = static_cast<int>(spec.n_values.size());
  const int num_m = static_cast<int>(spec.methods.size());

  RepDetail out;
  out.est.assign(num_n, std::vector<IntegratedBetaEstimate>(num_m));
  out.ted_selector_integral.assign(num_n, Eigen::VectorXd());
  out.ted_dantzig_gap.assign(num_n, 0.0);
  out.ted_clime_gap.assign(num_n, 0.0);
  try {
    const SimOutput sim = simulate_paths(dgp, seed);
    out.truth = sim.true_integrated_beta;
    for (int ni = 0; ni < num_n; ++ni) {
      const LogPricePanel panel = subsample_panel(sim.panel, spec.n_values[ni]);
      for (int mi = 0; mi < num_m; ++mi) {
        switch (spec.methods[mi]) {
          case Method::ted: {
            TedFit fit = ted_pipeline(panel, spec.tuning);
            std::vector<Eigen::VectorXd> selector;
            selector.reserve(fit.instants.windows.size());
            for (const WindowEstimate& w : fit.instants.windows)
              selector.push_back(w.dantzig_raw);
            out.ted_selector_integral[ni] =
                integrate(selector, fit.instants.k_n, panel.n());
            out.ted_dantzig_gap[ni] = fit.instants.max_dantzig_gap;
            out.ted_clime_gap[ni] = fit.instants.max_clime_gap;
            out.est[ni][mi] = std::move(fit.ibeta);
            break;
          }
          case Method::lasso: {
            BaselineConfig cfg =
                baseline_config_for(spec, Method::lasso, panel.p());
            cfg.truncation = spec.tuning.truncation;
            out.est[ni][mi] = lasso_integrated_beta(panel, cfg).ibeta;
            break;
          }
          case Method::akx:
          case Method::akx_six: {
            BaselineConfig cfg =
                baseline_config_for(spec, spec.methods[mi], panel.p());
            cfg.truncation = spec.tuning.truncation;
            out.est[ni][mi] = akx_integrated_beta(panel, cfg);
            break;
          }
        }
      }
    }
  } catch (const std::runtime_error& e) {
    // Data or numerical failure in one rep: record and let the caller keep
    // the remaining reps.  Configuration mistakes (invalid_argument) still
    // propagate.
    out.ok = false;
    out.error = e.what();
  }
  return out;
}

void mean_and_se(const std::vector<double>& xs, double& mean, double& se) {
  mean = 0.0;
  se = 0.0;
  const int n = static_cast<int>(xs.size());
  if (n == 0) return;
  mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  if (n < 2) return;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  se = std::sqrt(ss / (n - 1)) / std::sqrt(static_cast<double>(n));
}

BenchmarkReport run_benchmark(const BenchmarkSpec& spec) {
  validate_benchmark_spec(spec);
  const int num_r = static_cast<int>(spec.regimes.size());
  const int reps = spec.reps;

  std::vector<RepDetail> details(static_cast<std::size_t>(num_r) * reps);
  parallel_for(0, num_r * reps, spec.jobs, [&](int t) {
    const int ri = t / reps;
    const int rep = t % reps;
    const std::uint64_t rs = regime_stream_seed(spec.seed, spec.regimes[ri]);
    details[t] = run_benchmark_rep(spec, spec.regimes[ri], rep_seed(rs, rep));
  });

  BenchmarkReport report;
  report.seed = spec.seed;
  for (int ri = 0; ri < num_r; ++ri) {
    for (std::size_t ni = 0; ni < spec.n_values.size(); ++ni) {
      for (std::size_t mi = 0; mi < spec.methods.size(); ++mi) {
        CellStats cell;
        cell.method = spec.methods[mi];
        cell.regime = spec.regimes[ri];
        cell.n = spec.n_values[ni];
        std::vector<double> vmax, vl1, vl2;
        for (int rep = 0; rep < reps; ++rep) {
          const RepDetail& d = details[static_cast<std::size_t>(ri) * reps +
                                       rep];
          if (!d.ok) {
            ++cell.failures;
            continue;
          }
          ErrorNorms e = error_norms(d.est[ni][mi].thresholded, d.truth);
          cell.per_rep.push_back(e);
          vmax.push_back(e.max_err);
          vl1.push_back(e.l1);
          vl2.push_back(e.l2);
        }
        cell.reps = static_cast<int>(vl2.size());
        mean_and_se(vmax, cell.mean_max, cell.se_max);
        mean_and_se(vl1, cell.mean_l1, cell.se_l1);
        mean_and_se(vl2, cell.mean_l2, cell.se_l2);
        report.cells.push_back(std::move(cell));
      }
    }
  }
  return report;
}

std::vector<ReportRow> report_rows(const BenchmarkReport& rep) {
  // Method-major ordering (first appearance), then stored cell order.
  std::vector<Method> order;
  for (const CellStats& c : rep.cells)
    if (std::find(order.begin(), order.end(), c.method) == order.end())
      order.push_back(c.method);

  std::vector<ReportRow> rows;
  for (Method m : order) {
    for (const CellStats& c : rep.cells) {
      if (c.method != m) continue;
      const char* norms[3] = {"max", "l1", "l2"};
      const double means[3] = {c.mean_max, c.mean_l1, c.mean_l2};
      const double ses[3] = {c.se_max, c.se_l1, c.se_l2};
      for (int k = 0; k < 3; ++k) {
        ReportRow r;
        r.method = method_name(c.method);
        r.regime = regime_name(c.regime);
        r.norm = norms[k];
        r.n = c.n;
        r.mean = means[k];
        r.stderr_of_mean = ses[k];
        r.reps = c.reps;
        rows.push_back(std::move(r));
      }
    }
  }
  return rows;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  fields.push_back(cur);
  return fields;
}

double parse_double_field(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DataError("report CSV: bad " + what + " value '" + s + "'");
  }
}

int parse_int_field(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    long v = std::stol(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return static_cast<int>(v);
  } catch (const std::exception&) {
    throw DataError("report CSV: bad " + what + " value '" + s + "'");
  }
}

}  // namespace

void write_report_csv(const std::string& path,
                      const std::vector<ReportRow>& rows) {
  std::ostringstream out;
  out << "method,regime,n,norm,mean,stderr,reps\n";
  for (const ReportRow& r : rows) {
    out << r.method << ',' << r.regime << ',' << r.n << ',' << r.norm << ','
        << format_double(r.mean) << ',' << format_double(r.stderr_of_mean)
        << ',' << r.reps << '\n';
  }
  atomic_write_file(path, out.str());
}

std::vector<ReportRow> read_report_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open report CSV: " + path);
  std::string line;
  if (!std::getline(in, line))
    throw DataError("report CSV is empty: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "method,regime,n,norm,mean,stderr,reps")
    throw DataError("report CSV has unexpected header: " + line);
  std::vector<ReportRow> rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> f = split_csv_line(line);
    if (f.size() != 7)
      throw DataError("report CSV: expected 7 fields, got " +
                      std::to_string(f.size()));
    ReportRow r;
    r.method = f[0];
    r.regime = f[1];
    r.n = parse_int_field(f[2], "n");
    r.norm = f[3];
    r.mean = parse_double_field(f[4], "mean");
    r.stderr_of_mean = parse_double_field(f[5], "stderr");
    r.reps = parse_int_field(f[6], "reps");
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_long_report_csv(const std::string& path,
                           const std::vector<ReportRow>& rows) {
  std::vector<std::string> regimes, methods;
  for (const ReportRow& r : rows) {
    if (std::find(regimes.begin(), regimes.end(), r.regime) == regimes.end())
      regimes.push_back(r.regime);
    if (std::find(methods.begin(), methods.end(), r.method) == methods.end())
      methods.push_back(r.method);
  }
  const char* norms[3] = {"max", "l1", "l2"};

  std::ostringstream out;
  out << "regime,norm,method,n,mean,log10_mean\n";
  for (const std::string& regime : regimes) {
    for (const char* norm : norms) {
      for (const std::string& method : methods) {
        std::vector<const ReportRow*> group;
        for (const ReportRow& r : rows)
          if (r.regime == regime && r.norm == norm && r.method == method)
            group.push_back(&r);
        std::sort(group.begin(), group.end(),
                  [](const ReportRow* a, const ReportRow* b) {
                    return a->n < b->n;
                  });
        for (const ReportRow* r : group) {
          out << regime << ',' << norm << ',' << method << ',' << r->n << ','
              << format_double(r->mean) << ',';
          if (r->mean > 0.0 && std::isfinite(r->mean))
            out << format_double(std::log10(r->mean));
          out << '\n';
        }
      }
    }
  }
  atomic_write_file(path, out.str());
}

}  // namespace tedbeta
