#pragma once

#include <Eigen/Dense>
#include <string>

#include "tedbeta/panel.hpp"

namespace tedbeta {

// File formats
//
//   panel:  header "time,Y,X1,...,Xp", one row per grid point
//   truth:  header "coordinate,integrated_beta", coordinates 1..p
//   result: header "coordinate,raw,thresholded", coordinates 1..p
//
// Coordinates in files are 1-based and match the X<j> column labels; all
// in-memory indices are 0-based.  Doubles are written with %.17g so that a
// read/write round trip is exact and repeated runs produce identical bytes.

std::string format_double(double v);

// Writes `content` to `path` via a temp file in the same directory followed by
// an atomic rename, so readers never observe a partially written file.
void atomic_write_file(const std::string& path, const std::string& content);

LogPricePanel read_panel_csv(const std::string& path);
void write_panel_csv(const std::string& path, const LogPricePanel& panel);

void write_truth_csv(const std::string& path, const Eigen::VectorXd& ibeta);
Eigen::VectorXd read_truth_csv(const std::string& path);

void write_result_csv(const std::string& path, const Eigen::VectorXd& raw,
                      const Eigen::VectorXd& thresholded);

}  // namespace tedbeta
