#include "tedbeta/csv.hpp"

#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "tedbeta/errors.hpp"

namespace tedbeta {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& tok, const std::string& where) {
  if (tok.empty()) throw DataError("empty numeric field in " + where);
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end != tok.c_str() + tok.size())
    throw DataError("bad numeric field '" + tok + "' in " + where);
  return v;
}

long parse_index(const std::string& tok, const std::string& where) {
  char* end = nullptr;
  const long v = std::strtol(tok.c_str(), &end, 10);
  if (tok.empty() || end != tok.c_str() + tok.size())
    throw DataError("bad index field '" + tok + "' in " + where);
  return v;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void atomic_write_file(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path dir = target.parent_path();
  if (dir.empty()) dir = ".";
  const fs::path tmp =
      dir / (target.filename().string() + ".tmp." +
             std::to_string(static_cast<unsigned long>(::getpid())));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw DataError("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw DataError("cannot rename " + tmp.string() + " to " + path);
  }
}

LogPricePanel read_panel_csv(const std::string& path) {
  const auto lines = read_lines(path);
  if (lines.size() < 3) throw DataError(path + ": too few rows for a panel");

  const auto header = split_line(lines[0]);
  if (header.size() < 3 || header[0] != "time" || header[1] != "Y")
    throw DataError(path + ": header must start with time,Y,X1,...");
  const int p = static_cast<int>(header.size()) - 2;
  for (int j = 0; j < p; ++j) {
    if (header[2 + j] != "X" + std::to_string(j + 1))
      throw DataError(path + ": regressor columns must be labelled X1..Xp");
  }

  const int rows = static_cast<int>(lines.size()) - 1;
  LogPricePanel panel;
  panel.times.resize(rows);
  panel.y.resize(rows);
  panel.x.resize(rows, p);
  for (int i = 0; i < rows; ++i) {
    const auto tok = split_line(lines[i + 1]);
    const std::string where = path + " row " + std::to_string(i + 2);
    if (static_cast<int>(tok.size()) != p + 2)
      throw DataError(where + ": wrong field count");
    panel.times[i] = parse_double(tok[0], where);
    panel.y[i] = parse_double(tok[1], where);
    for (int j = 0; j < p; ++j) panel.x(i, j) = parse_double(tok[2 + j], where);
  }
  panel.validate();
  return panel;
}

void write_panel_csv(const std::string& path, const LogPricePanel& panel) {
  panel.validate();
  std::ostringstream out;
  out << "time,Y";
  for (int j = 0; j < panel.p(); ++j) out << ",X" << (j + 1);
  out << "\n";
  for (int i = 0; i <= panel.n(); ++i) {
    out << format_double(panel.times[i]) << ',' << format_double(panel.y[i]);
    for (int j = 0; j < panel.p(); ++j)
      out << ',' << format_double(panel.x(i, j));
    out << "\n";
  }
  atomic_write_file(path, out.str());
}

void write_truth_csv(const std::string& path, const Eigen::VectorXd& ibeta) {
  std::ostringstream out;
  out << "coordinate,integrated_beta\n";
  for (int j = 0; j < ibeta.size(); ++j)
    out << (j + 1) << ',' << format_double(ibeta[j]) << "\n";
  atomic_write_file(path, out.str());
}

Eigen::VectorXd read_truth_csv(const std::string& path) {
  const auto lines = read_lines(path);
  if (lines.empty() || split_line(lines[0]) !=
                           std::vector<std::string>{"coordinate",
                                                    "integrated_beta"})
    throw DataError(path + ": expected header coordinate,integrated_beta");
  Eigen::VectorXd out(lines.size() - 1);
  for (size_t i = 1; i < lines.size(); ++i) {
    const auto tok = split_line(lines[i]);
    const std::string where = path + " row " + std::to_string(i + 1);
    if (tok.size() != 2) throw DataError(where + ": wrong field count");
    if (parse_index(tok[0], where) != static_cast<long>(i))
      throw DataError(where + ": coordinates must run 1..p in order");
    out[static_cast<int>(i) - 1] = parse_double(tok[1], where);
  }
  return out;
}

void write_result_csv(const std::string& path, const Eigen::VectorXd& raw,
                      const Eigen::VectorXd& thresholded) {
  if (raw.size() != thresholded.size())
    throw UsageError("result vectors differ in length");
  std::ostringstream out;
  out << "coordinate,raw,thresholded\n";
  for (int j = 0; j < raw.size(); ++j)
    out << (j + 1) << ',' << format_double(raw[j]) << ','
        << format_double(thresholded[j]) << "\n";
  atomic_write_file(path, out.str());
}

}  // namespace tedbeta
