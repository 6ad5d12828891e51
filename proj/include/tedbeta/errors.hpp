#pragma once

#include <stdexcept>
#include <string>

namespace tedbeta {

// Error taxonomy shared by the library and the CLI. The CLI maps each class to
// a fixed process exit code (usage -> 1, data -> 2, numerical -> 3).

struct UsageError : std::invalid_argument {
  explicit UsageError(const std::string& msg) : std::invalid_argument(msg) {}
};

struct DataError : std::runtime_error {
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace tedbeta
