#include "tedbeta/config.hpp"

#include <cctype>
#include <climits>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "tedbeta/errors.hpp"

namespace tedbeta {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

bool valid_key(const std::string& k) {
  if (k.empty()) return false;
  for (char c : k) {
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '_' ||
                    c == '-' || c == '.';
    if (!ok) return false;
  }
  return true;
}

}  // namespace

ConfigMap parse_config_text(const std::string& text) {
  ConfigMap map;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos)
      throw UsageError("config line " + std::to_string(lineno) +
                       ": expected 'key = value'");
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (!valid_key(key))
      throw UsageError("config line " + std::to_string(lineno) +
                       ": bad key '" + key + "'");
    map[key] = value;
  }
  return map;
}

ConfigMap load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

const std::string* ConfigOverlay::find(const std::string& key) {
  auto it = map_.find(key);
  if (it == map_.end()) return nullptr;
  used_[key] = true;
  return &it->second;
}

bool ConfigOverlay::apply(const std::string& key, std::string& var) {
  const std::string* v = find(key);
  if (!v) return false;
  var = *v;
  return true;
}

bool ConfigOverlay::apply(const std::string& key, double& var) {
  const std::string* v = find(key);
  if (!v) return false;
  try {
    std::size_t pos = 0;
    double parsed = std::stod(*v, &pos);
    if (pos != v->size()) throw std::invalid_argument(*v);
    var = parsed;
  } catch (const std::exception&) {
    throw UsageError("config key '" + key + "': expected a number, got '" +
                     *v + "'");
  }
  return true;
}

bool ConfigOverlay::apply(const std::string& key, int& var) {
  const std::string* v = find(key);
  if (!v) return false;
  try {
    std::size_t pos = 0;
    long parsed = std::stol(*v, &pos);
    if (pos != v->size() || parsed < INT_MIN || parsed > INT_MAX)
      throw std::invalid_argument(*v);
    var = static_cast<int>(parsed);
  } catch (const std::exception&) {
    throw UsageError("config key '" + key + "': expected an integer, got '" +
                     *v + "'");
  }
  return true;
}

bool ConfigOverlay::apply(const std::string& key, std::uint64_t& var) {
  const std::string* v = find(key);
  if (!v) return false;
  try {
    std::size_t pos = 0;
    unsigned long long parsed = std::stoull(*v, &pos);
    if (pos != v->size()) throw std::invalid_argument(*v);
    var = static_cast<std::uint64_t>(parsed);
  } catch (const std::exception&) {
    throw UsageError("config key '" + key +
                     "': expected a nonnegative integer, got '" + *v + "'");
  }
  return true;
}

bool ConfigOverlay::apply(const std::string& key, bool& var) {
  const std::string* v = find(key);
  if (!v) return false;
  if (*v == "true" || *v == "1" || *v == "yes" || *v == "on") {
    var = true;
  } else if (*v == "false" || *v == "0" || *v == "no" || *v == "off") {
    var = false;
  } else {
    throw UsageError("config key '" + key + "': expected true/false, got '" +
                     *v + "'");
  }
  return true;
}

void ConfigOverlay::note(const std::string& key) { find(key); }

std::vector<std::string> ConfigOverlay::unused_keys() const {
  std::vector<std::string> out;
  for (const auto& [key, value] : map_)
    if (!used_.count(key)) out.push_back(key);
  return out;
}

}  // namespace tedbeta
