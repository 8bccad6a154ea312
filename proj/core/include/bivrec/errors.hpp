#pragma once

#include <stdexcept>
#include <string>

namespace bivrec {

// Exit-code contract of the CLI: 2 config, 3 data, 4 numerical.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace bivrec
