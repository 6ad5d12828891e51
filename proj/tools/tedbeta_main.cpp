// Command-line front end: simulate / estimate / tune / benchmark / report.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
// Logs go to stderr; data only ever goes to files (written atomically).

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "tedbeta/baselines.hpp"
#include "tedbeta/config.hpp"
#include "tedbeta/csv.hpp"
#include "tedbeta/errors.hpp"
#include "tedbeta/evaluation.hpp"
#include "tedbeta/sim.hpp"
#include "tedbeta/ted.hpp"
#include "tedbeta/tuning.hpp"

namespace {

using namespace tedbeta;

constexpr const char* kVersionString = "tedbeta 1.0.0";

std::string default_truth_path(const std::string& out) {
  namespace fs = std::filesystem;
  fs::path p(out);
  fs::path name = p.stem();
  name += "_truth.csv";
  return (p.parent_path() / name).string();
}

int parse_auto_int(const std::string& s, const std::string& what) {
  if (s == "auto") return 0;
  try {
    std::size_t pos = 0;
    long v = std::stol(s, &pos);
    if (pos != s.size() || v < 1) throw std::invalid_argument(s);
    return static_cast<int>(v);
  } catch (const std::exception&) {
    throw UsageError(what + ": expected 'auto' or a positive integer, got '" +
                     s + "'");
  }
}

std::optional<double> parse_auto_double(const std::string& s,
                                        const std::string& what) {
  if (s == "auto") return std::nullopt;
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size() || !(v > 0.0)) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw UsageError(what + ": expected 'auto' or a positive number, got '" +
                     s + "'");
  }
}

BetaRegime parse_regime_flag(const std::string& s) {
  std::optional<BetaRegime> r = parse_regime(s);
  if (!r)
    throw UsageError("--regime: expected 'time-varying' or 'constant', got '" +
                     s + "'");
  return *r;
}

ThresholdRule parse_rule_flag(const std::string& s) {
  if (s == "hard") return ThresholdRule::hard;
  if (s == "soft") return ThresholdRule::soft;
  throw UsageError("--threshold: expected 'hard' or 'soft', got '" + s + "'");
}

// Column labels on the command line are 1-based, matching the X<j> headers in
// panel files; internal indices are 0-based.
std::vector<int> parse_subset_flag(const std::string& s) {
  std::vector<int> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, ',')) {
    try {
      std::size_t pos = 0;
      long v = std::stol(cur, &pos);
      if (pos != cur.size() || v < 1) throw std::invalid_argument(cur);
      out.push_back(static_cast<int>(v) - 1);
    } catch (const std::exception&) {
      throw UsageError("--factor-subset: expected comma-separated 1-based "
                       "column labels, got '" + cur + "'");
    }
  }
  if (out.empty())
    throw UsageError("--factor-subset: no column labels given");
  return out;
}

std::vector<int> default_six(int p) {
  std::vector<int> cols;
  for (int j = 0; j < std::min(6, p); ++j) cols.push_back(j);
  return cols;
}

struct Options {
  // globals
  std::uint64_t seed = 12345;
  int jobs = 0;
  std::string config_path;

  // simulate
  struct {
    int p = 100, s_p = 0, n_all = 4000, n = 0;
    std::string regime = "time-varying";
    double jump_intensity_x = 20.0, jump_intensity_y = 15.0, jump_sd = 0.05;
    double corr_decay = 0.8, beta_drift = 0.05, beta_init = 1.0;
    std::string out, truth_out;
  } sim;

  // estimate
  struct {
    std::string input, output;
    std::string method = "ted";
    std::string k_n = "auto";
    std::string c_lambda = "auto", c_tau = "auto";
    double c_h = 0.5;
    std::string threshold = "hard";
    bool no_truncation = false;
    std::string factor_subset;
  } est;

  // tune
  struct {
    std::vector<std::string> inputs;
    std::string output;
    std::string k_n = "auto";
    bool no_truncation = false;
  } tune;

  // benchmark
  struct {
    std::string preset = "paper-desk";
    int reps = 0;  // 0 -> preset default
    std::string output;
  } bench;

  // report
  struct {
    std::string input, output;
  } rep;
};

void cmd_simulate(const Options& opt) {
  DgpSpec dgp;
  dgp.p = opt.sim.p;
  dgp.s_p = opt.sim.s_p;
  dgp.n_all = opt.sim.n_all;
  dgp.regime = parse_regime_flag(opt.sim.regime);
  dgp.jump_intensity_x = opt.sim.jump_intensity_x;
  dgp.jump_intensity_y = opt.sim.jump_intensity_y;
  dgp.jump_sd = opt.sim.jump_sd;
  dgp.corr_decay = opt.sim.corr_decay;
  dgp.beta_drift = opt.sim.beta_drift;
  dgp.beta_init = opt.sim.beta_init;
  dgp.validate();
  if (opt.sim.n != 0 &&
      (opt.sim.n < 2 || dgp.n_all % opt.sim.n != 0))
    throw UsageError("--n must divide --n-all");

  const SimOutput sim = simulate_paths(dgp, opt.seed);
  const bool subsample = opt.sim.n != 0 && opt.sim.n != dgp.n_all;
  LogPricePanel owned;
  const LogPricePanel* out_panel = &sim.panel;
  if (subsample) {
    owned = subsample_panel(sim.panel, opt.sim.n);
    out_panel = &owned;
  }

  const std::string truth_path = opt.sim.truth_out.empty()
                                     ? default_truth_path(opt.sim.out)
                                     : opt.sim.truth_out;
  write_panel_csv(opt.sim.out, *out_panel);
  write_truth_csv(truth_path, sim.true_integrated_beta);
  std::cerr << "tedbeta: wrote panel " << opt.sim.out << " (n="
            << out_panel->n() << ", p=" << out_panel->p() << ", regime="
            << regime_name(dgp.regime) << ", jumps="
            << sim.jumps.size() << ") and truth " << truth_path << "\n";
}

TuningConfig tuning_from_estimate_flags(const Options& opt) {
  TuningConfig cfg;
  std::optional<double> cl = parse_auto_double(opt.est.c_lambda, "--c-lambda");
  std::optional<double> ct = parse_auto_double(opt.est.c_tau, "--c-tau");
  cfg.c_lambda = cl ? TuneParam::fixed_at(*cl)
                    : TuneParam::over(default_c_grid());
  cfg.c_tau = ct ? TuneParam::fixed_at(*ct) : TuneParam::over(default_c_grid());
  if (opt.est.c_h < 0.0) throw UsageError("--c-h must be >= 0");
  cfg.c_h = TuneParam::fixed_at(opt.est.c_h);
  cfg.k_n = parse_auto_int(opt.est.k_n, "--k-n");
  cfg.rule = parse_rule_flag(opt.est.threshold);
  cfg.truncation = !opt.est.no_truncation;
  return cfg;
}

void cmd_estimate(const Options& opt) {
  const LogPricePanel panel = read_panel_csv(opt.est.input);
  std::optional<Method> method = parse_method(opt.est.method);
  if (!method)
    throw UsageError("--method: expected ted|akx|akx-six|lasso, got '" +
                     opt.est.method + "'");

  IntegratedBetaEstimate est;
  switch (*method) {
    case Method::ted: {
      const TedFit fit = ted_pipeline(panel, tuning_from_estimate_flags(opt));
      est = fit.ibeta;
      std::cerr << "tedbeta: c_lambda=" << fit.resolved.c_lambda
                << " c_tau=" << fit.resolved.c_tau << " c_h="
                << fit.resolved.c_h << " k_n=" << fit.resolved.k_n
                << " lambda_n=" << fit.resolved.lambda_n << " tau_n="
                << fit.resolved.tau_n << " h_n=" << fit.resolved.h_n << "\n";
      break;
    }
    case Method::lasso: {
      BaselineConfig cfg;
      cfg.truncation = !opt.est.no_truncation;
      const LassoFit fit = lasso_integrated_beta(panel, cfg);
      est = fit.ibeta;
      std::cerr << "tedbeta: lasso lambda=" << fit.table.chosen_value()
                << "\n";
      break;
    }
    case Method::akx:
    case Method::akx_six: {
      BaselineConfig cfg;
      cfg.truncation = !opt.est.no_truncation;
      cfg.big_k_n = parse_auto_int(opt.est.k_n, "--k-n");
      if (*method == Method::akx_six) {
        cfg.factor_subset = opt.est.factor_subset.empty()
                                ? default_six(panel.p())
                                : parse_subset_flag(opt.est.factor_subset);
      } else if (!opt.est.factor_subset.empty()) {
        throw UsageError("--factor-subset only applies to --method akx-six");
      }
      est = akx_integrated_beta(panel, cfg);
      break;
    }
  }
  write_result_csv(opt.est.output, est.raw, est.thresholded);
  std::cerr << "tedbeta: wrote " << opt.est.output << " (method="
            << est.method << ")\n";
}

void cmd_tune(const Options& opt) {
  if (opt.tune.inputs.empty()) throw UsageError("tune: need >= 1 --input");
  std::vector<LogPricePanel> panels;
  panels.reserve(opt.tune.inputs.size());
  for (const std::string& path : opt.tune.inputs)
    panels.push_back(read_panel_csv(path));

  const int k_n = parse_auto_int(opt.tune.k_n, "--k-n");
  const bool truncation = !opt.tune.no_truncation;

  // c_lambda and c_tau are per-panel selections; they run on the first
  // panel.  c_h needs consecutive periods and appears only with >= 2 inputs.
  const PreparedPanel prep = prepare_panel(panels.front(), k_n, truncation);
  const LambdaSelection ls = select_c_lambda_bic(prep, default_c_grid());
  const TauSelection ts = select_c_tau_trace(prep, default_c_grid());

  std::ostringstream out;
  out << "parameter,candidate,loss,chosen\n";
  auto emit = [&out](const char* name, const SelectionTable& t) {
    for (std::size_t i = 0; i < t.candidates.size(); ++i) {
      out << name << ',' << format_double(t.candidates[i]) << ','
          << format_double(t.loss[i]) << ','
          << (static_cast<int>(i) == t.chosen ? 1 : 0) << '\n';
    }
  };
  emit("c_lambda", ls.table);
  emit("c_tau", ts.table);

  std::ostringstream log;
  log << "tedbeta: c_lambda=" << ls.c_lambda << " c_tau=" << ts.c_tau;
  if (panels.size() >= 2) {
    TuningConfig cfg;
    cfg.k_n = k_n;
    cfg.truncation = truncation;
    const ChSelection cs = select_c_h_mspe(panels, cfg, default_ch_grid());
    emit("c_h", cs.table);
    log << " c_h=" << cs.c_h;
  }
  atomic_write_file(opt.tune.output, out.str());
  log << " (table: " << opt.tune.output << ")";
  std::cerr << log.str() << "\n";
}

BenchmarkSpec preset_spec(const Options& opt) {
  BenchmarkSpec bs;
  bs.seed = opt.seed;
  bs.jobs = opt.jobs;
  bs.regimes = {BetaRegime::time_varying, BetaRegime::constant};
  bs.methods = {Method::ted, Method::lasso, Method::akx};
  bs.dgp.n_all = 4000;
  if (opt.bench.preset == "paper-desk") {
    bs.dgp.p = 50;
    bs.n_values = {500, 1000, 2000};
    bs.reps = 100;
  } else if (opt.bench.preset == "paper") {
    bs.dgp.p = 100;
    bs.n_values = {1000, 2000, 4000};
    bs.reps = 1000;
  } else {
    throw UsageError("--preset: expected 'paper-desk' or 'paper', got '" +
                     opt.bench.preset + "'");
  }
  if (opt.bench.reps > 0) bs.reps = opt.bench.reps;
  return bs;
}

void cmd_benchmark(const Options& opt) {
  const BenchmarkSpec bs = preset_spec(opt);
  std::cerr << "tedbeta: benchmark preset=" << opt.bench.preset << " p="
            << bs.dgp.p << " reps=" << bs.reps << " ("
            << bs.regimes.size() * bs.n_values.size() * bs.methods.size()
            << " cells)\n";
  const auto t0 = std::chrono::steady_clock::now();
  const BenchmarkReport report = tedbeta::run_benchmark(bs);
  const auto dt = std::chrono::duration_cast<std::chrono::seconds>(
      std::chrono::steady_clock::now() - t0);
  write_report_csv(opt.bench.output, report_rows(report));
  int failures = 0;
  for (const CellStats& c : report.cells) failures += c.failures;
  std::cerr << "tedbeta: wrote " << opt.bench.output << " ("
            << report.cells.size() << " cells, " << dt.count()
            << "s elapsed, " << failures << " rep failures)\n";
}

void cmd_report(const Options& opt) {
  const std::vector<ReportRow> rows = read_report_csv(opt.rep.input);
  write_long_report_csv(opt.rep.output, rows);
  std::cerr << "tedbeta: wrote " << opt.rep.output << " (" << rows.size()
            << " rows)\n";
}

int dispatch(int argc, char** argv) {
  Options opt;
  CLI::App app{"Integrated-coefficient estimation for high-dimensional "
               "continuous-time regression panels"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersionString));
  app.add_option("--seed", opt.seed, "Base seed for all randomness");
  app.add_option("--jobs", opt.jobs, "Worker threads (0 = all cores)");
  app.add_option("--config", opt.config_path,
                 "Key-value config file; precedence CLI > file > defaults");

  CLI::App* sim = app.add_subcommand(
      "simulate", "Generate a synthetic panel and its true integrated beta");
  sim->add_option("--p", opt.sim.p, "Number of regressors");
  sim->add_option("--s-p", opt.sim.s_p, "Active coordinates (0 = ceil(log p))");
  sim->add_option("--n-all", opt.sim.n_all, "Fine simulation grid length");
  sim->add_option("--n", opt.sim.n,
                  "Subsample the panel to n increments before writing "
                  "(0 = keep fine grid; must divide --n-all)");
  sim->add_option("--regime", opt.sim.regime, "time-varying | constant");
  sim->add_option("--jump-intensity-x", opt.sim.jump_intensity_x,
                  "Factor jump intensity per coordinate per unit time");
  sim->add_option("--jump-intensity-y", opt.sim.jump_intensity_y,
                  "Response jump intensity per unit time");
  sim->add_option("--jump-sd", opt.sim.jump_sd, "Jump size std dev");
  sim->add_option("--corr-decay", opt.sim.corr_decay,
                  "Cross-sectional correlation decay");
  sim->add_option("--beta-drift", opt.sim.beta_drift,
                  "Drift of active coefficients");
  sim->add_option("--beta-init", opt.sim.beta_init,
                  "Initial value of active coefficients");
  sim->add_option("--out", opt.sim.out, "Panel CSV path")->required();
  sim->add_option("--truth-out", opt.sim.truth_out,
                  "Truth CSV path (default: <out>_truth.csv)");

  CLI::App* est = app.add_subcommand(
      "estimate", "Estimate the integrated coefficient vector from a panel");
  est->add_option("--input", opt.est.input, "Panel CSV")->required();
  est->add_option("--method", opt.est.method, "ted | akx | akx-six | lasso");
  est->add_option("--k-n", opt.est.k_n,
                  "Window length: 'auto' or an integer (ted: floor(sqrt(n)); "
                  "akx: floor(n^0.47))");
  est->add_option("--c-lambda", opt.est.c_lambda,
                  "Selector constant: 'auto' (grid search) or a number");
  est->add_option("--c-tau", opt.est.c_tau,
                  "Precision constant: 'auto' (grid search) or a number");
  est->add_option("--c-h", opt.est.c_h, "Threshold constant (fixed)");
  est->add_option("--threshold", opt.est.threshold, "hard | soft");
  est->add_flag("--no-truncation", opt.est.no_truncation,
                "Skip jump truncation of increments");
  est->add_option("--factor-subset", opt.est.factor_subset,
                  "akx-six: comma-separated 1-based column labels "
                  "(default: 1,2,3,4,5,6)");
  est->add_option("--output", opt.est.output, "Result CSV path")->required();

  CLI::App* tune = app.add_subcommand(
      "tune", "Select tuning constants and write the loss tables");
  tune->add_option("--input", opt.tune.inputs,
                   "Panel CSV (repeat for consecutive periods; the "
                   "threshold-constant row needs >= 2)")
      ->required();
  tune->add_option("--k-n", opt.tune.k_n, "'auto' or an integer");
  tune->add_flag("--no-truncation", opt.tune.no_truncation,
                 "Skip jump truncation");
  tune->add_option("--output", opt.tune.output, "Loss table CSV path")
      ->required();

  CLI::App* bench = app.add_subcommand(
      "benchmark", "Monte Carlo method comparison on the synthetic generator");
  bench->add_option("--preset", opt.bench.preset,
                    "paper-desk (p=50, 100 reps) | paper (p=100, 1000 reps)");
  bench->add_option("--reps", opt.bench.reps, "Override preset rep count");
  bench->add_option("--output", opt.bench.output, "Report CSV path")
      ->required();

  CLI::App* rep = app.add_subcommand(
      "report", "Render a benchmark report as plot-ready long-format CSV");
  rep->add_option("--input", opt.rep.input, "Report CSV")->required();
  rep->add_option("--output", opt.rep.output, "Long-format CSV path")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  // Config file: fills in anything the command line left at its default.
  if (!opt.config_path.empty()) {
    const ConfigMap raw = load_config_file(opt.config_path);
    ConfigOverlay ov(raw);
    auto lay = [&ov](CLI::App* cmd, const std::string& flag,
                     const std::string& key, auto& var) {
      if (cmd->count(flag) == 0)
        ov.apply(key, var);
      else
        ov.note(key);
    };
    lay(&app, "--seed", "seed", opt.seed);
    lay(&app, "--jobs", "jobs", opt.jobs);

    const std::string active = app.get_subcommands().front()->get_name();
    if (active == "simulate") {
      lay(sim, "--p", "simulate.p", opt.sim.p);
      lay(sim, "--s-p", "simulate.s-p", opt.sim.s_p);
      lay(sim, "--n-all", "simulate.n-all", opt.sim.n_all);
      lay(sim, "--n", "simulate.n", opt.sim.n);
      lay(sim, "--regime", "simulate.regime", opt.sim.regime);
      lay(sim, "--jump-intensity-x", "simulate.jump-intensity-x",
          opt.sim.jump_intensity_x);
      lay(sim, "--jump-intensity-y", "simulate.jump-intensity-y",
          opt.sim.jump_intensity_y);
      lay(sim, "--jump-sd", "simulate.jump-sd", opt.sim.jump_sd);
      lay(sim, "--corr-decay", "simulate.corr-decay", opt.sim.corr_decay);
      lay(sim, "--beta-drift", "simulate.beta-drift", opt.sim.beta_drift);
      lay(sim, "--beta-init", "simulate.beta-init", opt.sim.beta_init);
      lay(sim, "--out", "simulate.out", opt.sim.out);
      lay(sim, "--truth-out", "simulate.truth-out", opt.sim.truth_out);
    } else if (active == "estimate") {
      lay(est, "--input", "estimate.input", opt.est.input);
      lay(est, "--method", "estimate.method", opt.est.method);
      lay(est, "--k-n", "estimate.k-n", opt.est.k_n);
      lay(est, "--c-lambda", "estimate.c-lambda", opt.est.c_lambda);
      lay(est, "--c-tau", "estimate.c-tau", opt.est.c_tau);
      lay(est, "--c-h", "estimate.c-h", opt.est.c_h);
      lay(est, "--threshold", "estimate.threshold", opt.est.threshold);
      lay(est, "--no-truncation", "estimate.no-truncation",
          opt.est.no_truncation);
      lay(est, "--factor-subset", "estimate.factor-subset",
          opt.est.factor_subset);
      lay(est, "--output", "estimate.output", opt.est.output);
    } else if (active == "tune") {
      if (tune->count("--input") == 0) {
        std::string joined;
        if (ov.apply("tune.input", joined)) {
          opt.tune.inputs.clear();
          std::istringstream in(joined);
          std::string part;
          while (std::getline(in, part, ','))
            if (!part.empty()) opt.tune.inputs.push_back(part);
        }
      } else {
        ov.note("tune.input");
      }
      lay(tune, "--k-n", "tune.k-n", opt.tune.k_n);
      lay(tune, "--no-truncation", "tune.no-truncation",
          opt.tune.no_truncation);
      lay(tune, "--output", "tune.output", opt.tune.output);
    } else if (active == "benchmark") {
      lay(bench, "--preset", "benchmark.preset", opt.bench.preset);
      lay(bench, "--reps", "benchmark.reps", opt.bench.reps);
      lay(bench, "--output", "benchmark.output", opt.bench.output);
    } else if (active == "report") {
      lay(rep, "--input", "report.input", opt.rep.input);
      lay(rep, "--output", "report.output", opt.rep.output);
    }

    // Keys scoped to a command other than the active one are legal (one file
    // can serve several commands); anything else unconsumed is a typo.
    const std::vector<std::string> commands = {"simulate", "estimate", "tune",
                                               "benchmark", "report"};
    for (const auto& [key, value] : raw) {
      (void)value;
      for (const std::string& c : commands)
        if (c != active && key.rfind(c + ".", 0) == 0) ov.note(key);
    }
    const std::vector<std::string> unused = ov.unused_keys();
    if (!unused.empty()) {
      std::string msg = "unknown config key(s):";
      for (const std::string& k : unused) msg += " " + k;
      throw UsageError(msg);
    }
  }

  const std::string active = app.get_subcommands().front()->get_name();
  if (active == "simulate") cmd_simulate(opt);
  else if (active == "estimate") cmd_estimate(opt);
  else if (active == "tune") cmd_tune(opt);
  else if (active == "benchmark") cmd_benchmark(opt);
  else cmd_report(opt);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return dispatch(argc, argv);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
