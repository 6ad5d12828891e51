#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace tedbeta {

// Flat key -> value store for config files.  Syntax: one `key = value` per
// line, `#` starts a comment, blank lines ignored, keys may be dotted
// (e.g. dgp.p).  No quoting; values run to the comment or end of line with
// surrounding whitespace trimmed.  Later duplicates win.
using ConfigMap = std::map<std::string, std::string>;

ConfigMap parse_config_text(const std::string& text);  // UsageError on syntax
ConfigMap load_config_file(const std::string& path);   // DataError if unreadable

// Applies file values to variables the command line did not set, and tracks
// which keys were consumed so typos can be reported.  Precedence is
// CLI > file > defaults: call apply() only for options absent from argv.
class ConfigOverlay {
 public:
  ConfigOverlay() = default;
  explicit ConfigOverlay(ConfigMap map) : map_(std::move(map)) {}

  // Each returns true when the key was present (and the variable updated).
  // Malformed values throw UsageError naming the key.
  bool apply(const std::string& key, std::string& var);
  bool apply(const std::string& key, double& var);
  bool apply(const std::string& key, int& var);
  bool apply(const std::string& key, std::uint64_t& var);
  bool apply(const std::string& key, bool& var);

  // Marks a key consumed without reading it (for options that take raw
  // strings handled elsewhere).
  void note(const std::string& key);

  // Keys never consumed by any apply()/note() call -- typos or options the
  // dispatched command does not accept.  Throwing on these is the caller's
  // job (after every command-relevant key has been applied).
  std::vector<std::string> unused_keys() const;

 private:
  const std::string* find(const std::string& key);

  ConfigMap map_;
  std::map<std::string, bool> used_;
};

}  // namespace tedbeta
