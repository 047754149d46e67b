#pragma once

#include <stdexcept>
#include <string>

namespace aewb {

// DimensionError lives next to Tensor.

struct ContractError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FetchError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UndefinedMetricError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace aewb
