#include "tedbeta/windows.hpp"

#include <cmath>

#include "tedbeta/errors.hpp"

namespace tedbeta {

namespace {

constexpr double kPiHalf = 1.5707963267948966;

// A column whose spread is this small (absolutely, or relative to its mean)
// carries no usable variation within the window.
bool degenerate_scale(double sd, double mean) {
  return sd <= 1e-14 + 1e-12 * std::abs(mean);
}

}  // namespace

double bipower_variation(const Eigen::VectorXd& d) {
  if (d.size() < 2)
    throw UsageError("bipower variation needs at least two increments");
  double acc = 0.0;
  for (int i = 1; i < d.size(); ++i)
    acc += std::abs(d[i - 1]) * std::abs(d[i]);
  return kPiHalf * acc;
}

TruncationLevels truncation_levels(const IncrementMatrix& incr) {
  if (incr.truncated)
    throw UsageError("truncation levels must come from untruncated increments");
  const int n = incr.n();
  const int p = incr.p();
  if (n < 2) throw UsageError("need at least two increments for truncation");
  const double rate = 3.0 * std::pow(static_cast<double>(n), -0.47);
  TruncationLevels lv;
  lv.bv_y = bipower_variation(incr.dy);
  lv.u_y = rate * std::sqrt(lv.bv_y);
  lv.bv_x.resize(p);
  lv.u_x.resize(p);
  for (int j = 0; j < p; ++j) {
    lv.bv_x[j] = bipower_variation(incr.dx.col(j));
    lv.u_x[j] = rate * std::sqrt(lv.bv_x[j]);
  }
  return lv;
}

IncrementMatrix truncate(const IncrementMatrix& incr,
                         const TruncationLevels& levels) {
  if (incr.truncated) throw UsageError("increments already truncated");
  if (levels.u_x.size() != incr.p())
    throw UsageError("truncation levels do not match the panel width");
  IncrementMatrix out = incr;
  for (int i = 0; i < out.n(); ++i)
    if (std::abs(out.dy[i]) > levels.u_y) out.dy[i] = 0.0;
  for (int j = 0; j < out.p(); ++j) {
    const double u = levels.u_x[j];
    for (int i = 0; i < out.n(); ++i)
      if (std::abs(out.dx(i, j)) > u) out.dx(i, j) = 0.0;
  }
  out.truncated = true;
  out.levels = levels;
  return out;
}

StandardizedWindow standardize_window(const WindowView& w) {
  if (w.src == nullptr || w.len < 1) throw UsageError("empty window");
  const int k = w.len;
  const int p = w.src->p();
  StandardizedWindow out;
  out.x = Eigen::MatrixXd::Zero(k, p);
  out.scales.x_mean.resize(p);
  out.scales.x_sd.resize(p);
  out.scales.active.assign(p, 0);

  const auto xv = w.xv();
  for (int j = 0; j < p; ++j) {
    const double mean = xv.col(j).mean();
    const double var = (xv.col(j).array() - mean).square().sum() / k;
    const double sd = std::sqrt(std::max(var, 0.0));
    out.scales.x_mean[j] = mean;
    out.scales.x_sd[j] = sd;
    if (!degenerate_scale(sd, mean)) {
      out.scales.active[j] = 1;
      out.x.col(j) = (xv.col(j).array() - mean) / sd;
    }
  }

  const auto yv = w.yv();
  const double ym = yv.mean();
  const double yvar = (yv.array() - ym).square().sum() / k;
  const double ysd = std::sqrt(std::max(yvar, 0.0));
  out.scales.y_mean = ym;
  out.scales.y_sd = ysd;
  out.scales.y_ok = !degenerate_scale(ysd, ym);
  out.y = out.scales.y_ok ? ((yv.array() - ym) / ysd).matrix().eval()
                          : Eigen::VectorXd::Zero(k);
  return out;
}

WindowGram window_gram(const StandardizedWindow& sw) {
  const int k = static_cast<int>(sw.y.size());
  const int p = static_cast<int>(sw.x.cols());
  WindowGram g;
  g.scales = sw.scales;
  g.k = k;
  g.p_full = p;
  g.degenerate = !sw.scales.y_ok;
  for (int j = 0; j < p; ++j)
    if (sw.scales.active[j]) g.cols.push_back(j);
  const int pa = static_cast<int>(g.cols.size());
  Eigen::MatrixXd xa(k, pa);
  for (int j = 0; j < pa; ++j) xa.col(j) = sw.x.col(g.cols[j]);
  g.a = (xa.transpose() * xa) / static_cast<double>(k);
  g.bvec = (xa.transpose() * sw.y) / static_cast<double>(k);
  return g;
}

WindowGram window_gram(const WindowView& w) {
  return window_gram(standardize_window(w));
}

int auto_k_n(int n) {
  if (n < 1) throw UsageError("auto_k_n: n must be >= 1");
  return static_cast<int>(std::floor(std::sqrt(static_cast<double>(n))));
}

PreparedPanel prepare_panel(const LogPricePanel& panel, int k_n,
                            bool truncation) {
  PreparedPanel out;
  out.incr = increments(panel);
  out.n = out.incr.n();
  out.p = out.incr.p();
  out.delta_n = 1.0 / out.n;
  out.k_n = (k_n > 0) ? k_n : auto_k_n(out.n);
  if (truncation) {
    const TruncationLevels lv = truncation_levels(out.incr);
    out.incr = truncate(out.incr, lv);
    out.truncated = true;
  }
  const auto blocks = window_blocks(out.incr, out.k_n);
  out.grams.reserve(blocks.size());
  for (const auto& w : blocks) out.grams.push_back(window_gram(w));
  return out;
}

}  // namespace tedbeta
