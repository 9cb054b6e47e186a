#pragma once

#include <stdexcept>
#include <string>

namespace doef {

// Invalid configuration value or combination. The message names the
// violated bound.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Unknown object, class or page identifier.
class LookupError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// Operation not valid in the current state (e.g. deleting from an empty base).
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace doef
