#include "tedbeta/panel.hpp"

#include <cmath>
#include <string>

#include "tedbeta/errors.hpp"

namespace tedbeta {

void LogPricePanel::validate() const {
  const auto rows = times.size();
  if (rows < 2) throw DataError("panel needs at least two time points");
  if (y.size() != rows || x.rows() != rows)
    throw DataError("panel column lengths disagree");
  if (x.cols() < 1) throw DataError("panel needs at least one regressor");
  if (!times.allFinite() || !y.allFinite() || !x.allFinite())
    throw DataError("panel contains non-finite values");

  const int nn = n();
  const double step = 1.0 / nn;
  if (std::abs(times[0]) > kGridTol)
    throw DataError("time grid must start at 0");
  if (std::abs(times[nn] - 1.0) > kGridTol)
    throw DataError("time grid must end at 1");
  for (int i = 0; i < nn; ++i) {
    if (std::abs(times[i + 1] - times[i] - step) > kGridTol)
      throw DataError("time grid is not uniform at row " + std::to_string(i));
  }
}

IncrementMatrix increments(const LogPricePanel& panel) {
  panel.validate();
  const int nn = panel.n();
  IncrementMatrix out;
  out.dy = panel.y.tail(nn) - panel.y.head(nn);
  out.dx = panel.x.bottomRows(nn) - panel.x.topRows(nn);
  return out;
}

std::vector<WindowView> window_blocks(const IncrementMatrix& incr, int k_n) {
  const int nn = incr.n();
  if (k_n < 1 || k_n > nn)
    throw UsageError("window length k_n must be in [1, n]");
  const int blocks = nn / k_n;
  std::vector<WindowView> out;
  out.reserve(blocks);
  for (int i = 0; i < blocks; ++i)
    out.push_back(WindowView{&incr, i * k_n, k_n});
  return out;
}

}  // namespace tedbeta
